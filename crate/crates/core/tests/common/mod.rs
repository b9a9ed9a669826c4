#![allow(dead_code)]

use std::collections::BTreeSet;

use idx_core::fixtures::PLAY_OUTSIDE_EXPLANATIONS_CSV;
use idx_core::{Assignment, Classifier, VarId};

/// Printed prior and conditional probabilities of the play-outside classifier:
/// `(conditioning, variable, value, probability)`, with an empty conditioning for priors.
pub const PRINTED_PROBABILITIES: &[(&str, &str, &str, f64)] = &[
    ("", "w", "l", 0.33),
    ("", "w", "m", 0.33),
    ("", "w", "h", 0.33),
    ("", "t", "l", 0.33),
    ("", "t", "m", 0.33),
    ("", "t", "h", 0.33),
    ("", "p", "l", 0.50),
    ("", "p", "h", 0.50),
    ("", "r", "+", 0.67),
    ("", "r", "-", 0.33),
    ("", "o", "+", 0.22),
    ("", "o", "-", 0.78),
    ("r=+", "t", "l", 0.25),
    ("r=+", "t", "m", 0.25),
    ("r=+", "t", "h", 0.50),
    ("r=+", "p", "l", 0.75),
    ("r=+", "p", "h", 0.25),
    ("r=-", "t", "l", 0.49),
    ("r=-", "t", "m", 0.49),
    ("r=-", "t", "h", 0.02),
    ("r=-", "p", "l", 0.02),
    ("r=-", "p", "h", 0.98),
    ("o=+", "w", "l", 0.48),
    ("o=+", "w", "m", 0.26),
    ("o=+", "w", "h", 0.26),
    ("o=+", "t", "l", 0.26),
    ("o=+", "t", "m", 0.72),
    ("o=+", "t", "h", 0.02),
    ("o=+", "r", "+", 0.02),
    ("o=+", "r", "-", 0.98),
    ("o=-", "w", "l", 0.28),
    ("o=-", "w", "m", 0.36),
    ("o=-", "w", "h", 0.36),
    ("o=-", "t", "l", 0.36),
    ("o=-", "t", "m", 0.22),
    ("o=-", "t", "h", 0.42),
    ("o=-", "r", "+", 0.85),
    ("o=-", "r", "-", 0.15),
];

/// One unit in the last printed digit.
pub const PRINTED_TOLERANCE: f64 = 0.01;

/// Fitted value for one printed entry.
pub fn fitted(c: &Classifier, given: &str, var: &str, value: &str) -> f64 {
    let v = c.var(var).unwrap();
    let k = c.value(v, value).unwrap();
    if given.is_empty() {
        return c.prior(v)[k];
    }
    let (pn, pv) = given.split_once('=').unwrap();
    let p = c.var(pn).unwrap();
    let j = c.value(p, pv).unwrap();
    c.conditional(p, v).unwrap()[j][k]
}

/// Expected decisions and relation sets for one play-outside input.
#[derive(Debug)]
pub struct ExpectedRow {
    pub input: String,
    pub r: String,
    pub o: String,
    cells: Vec<(String, BTreeSet<String>)>,
}

impl ExpectedRow {
    /// Influencers expected under `column`, e.g. `sd_attack_o`.
    pub fn set(&self, column: &str) -> &BTreeSet<String> {
        &self.cells.iter().find(|(c, _)| c == column).unwrap().1
    }
}

pub const RELATION_COLUMNS: &[(&str, &str, &str, &str)] = &[
    // (column, kit, relation label, influencee)
    ("sd_attack_r", "sd", "stochastic-attack", "r"),
    ("sd_support_r", "sd", "stochastic-support", "r"),
    ("md_attack_r", "md", "monotonic-attack", "r"),
    ("md_support_r", "md", "monotonic-support", "r"),
    ("sd_attack_o", "sd", "stochastic-attack", "o"),
    ("sd_support_o", "sd", "stochastic-support", "o"),
    ("md_attack_o", "md", "monotonic-attack", "o"),
    ("md_support_o", "md", "monotonic-support", "o"),
    ("critical_r", "cf", "critical", "r"),
    ("potential_r", "cf", "potential", "r"),
    ("critical_o", "cf", "critical", "o"),
    ("potential_o", "cf", "potential", "o"),
];

pub fn expected_rows() -> Vec<ExpectedRow> {
    let mut lines = PLAY_OUTSIDE_EXPLANATIONS_CSV.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            let input = format!("w={},t={},p={}", cells[0], cells[1], cells[2]);
            let sets = header[5..]
                .iter()
                .zip(&cells[5..])
                .map(|(h, c)| (h.to_string(), c.chars().map(String::from).collect()))
                .collect();
            ExpectedRow {
                input,
                r: cells[3].to_string(),
                o: cells[4].to_string(),
                cells: sets,
            }
        })
        .collect()
}

/// Posterior of `x` by enumerating every joint value of `x` and its children,
/// with children observed or, for classifications, decided the same way.
pub fn brute_force_posterior(c: &Classifier, a: &Assignment, x: VarId) -> Vec<f64> {
    let children = c.children(x).to_vec();
    let observed: Vec<usize> = children.iter().map(|&ch| brute_force_decide(c, a, ch)).collect();
    let sizes: Vec<usize> = children.iter().map(|&ch| c.domain(ch).len()).collect();
    let n = c.domain(x).len();
    let mut joint = vec![0.0; n];
    let total: usize = sizes.iter().product();
    for (k, slot) in joint.iter_mut().enumerate() {
        for mut idx in 0..total {
            let mut values = vec![0; children.len()];
            for (j, &s) in sizes.iter().enumerate().rev() {
                values[j] = idx % s;
                idx /= s;
            }
            if values != observed {
                continue;
            }
            let mut p = c.prior(x)[k];
            for (&ch, &v) in children.iter().zip(&values) {
                p *= c.conditional(x, ch).unwrap()[k][v];
            }
            *slot += p;
        }
    }
    let z: f64 = joint.iter().sum();
    joint.into_iter().map(|p| p / z).collect()
}

pub fn brute_force_decide(c: &Classifier, a: &Assignment, v: VarId) -> usize {
    if !c.is_classification(v) {
        return a.get(v).unwrap();
    }
    let post = brute_force_posterior(c, a, v);
    let mut best = 0;
    for (k, &p) in post.iter().enumerate() {
        if p > post[best] {
            best = k;
        }
    }
    best
}
