use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Assignment, Classifier, Domain, Role, VarId, Variable};

/// Shape of randomly generated classifiers.
///
/// A classifier is drawn as follows, so any counterexample can be replayed from
/// its seed: pick `2..=max_nodes` variables; add each forward edge `i -> j`
/// (`i < j`) with probability one half, forcing at least one; variables with
/// children are classifications, the rest observations. With probability
/// `star_probability` the structure is instead a naive Bayes star. Every prior
/// row and conditional column is a vector of uniform draws plus `floor`,
/// normalised.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub max_nodes: usize,
    pub max_values: usize,
    /// Restrict every domain to two values.
    pub binary: bool,
    pub floor: f64,
    pub star_probability: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_nodes: 5,
            max_values: 4,
            binary: false,
            floor: 0.05,
            star_probability: 0.2,
        }
    }
}

impl RandomSpec {
    pub fn binary() -> Self {
        RandomSpec {
            binary: true,
            ..Self::default()
        }
    }
}

fn distribution(rng: &mut impl Rng, len: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + floor).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Draws a classifier from `rng`.
pub fn random_classifier(rng: &mut impl Rng, spec: &RandomSpec) -> Classifier {
    let n = rng.random_range(2..=spec.max_nodes.max(2));
    let mut edges = Vec::new();
    if rng.random_bool(spec.star_probability) {
        edges.extend((1..n).map(|j| (0, j)));
    } else {
        for j in 1..n {
            for i in 0..j {
                if rng.random_bool(0.5) {
                    edges.push((i, j));
                }
            }
        }
        if edges.is_empty() {
            let j = rng.random_range(1..n);
            let i = rng.random_range(0..j);
            edges.push((i, j));
        }
    }

    let mut has_children = vec![false; n];
    for &(i, _) in &edges {
        has_children[i] = true;
    }
    let variables: Vec<Variable> = (0..n)
        .map(|i| {
            let size = if spec.binary {
                2
            } else {
                rng.random_range(2..=spec.max_values.max(2))
            };
            Variable {
                name: format!("v{i}"),
                role: if has_children[i] {
                    Role::Classification
                } else {
                    Role::Observation
                },
                domain: Domain::new((0..size).map(|k| k.to_string())).expect("distinct labels"),
            }
        })
        .collect();
    let priors = variables
        .iter()
        .map(|v| distribution(rng, v.domain.len(), spec.floor))
        .collect();
    let mut conditionals = BTreeMap::new();
    for &(i, j) in &edges {
        let table = (0..variables[i].domain.len())
            .map(|_| distribution(rng, variables[j].domain.len(), spec.floor))
            .collect();
        conditionals.insert((VarId(i), VarId(j)), table);
    }
    let edges = edges.into_iter().map(|(i, j)| (VarId(i), VarId(j))).collect();
    Classifier::new(variables, edges, priors, conditionals).expect("well-formed random classifier")
}

/// Draws a classifier from its own seed.
pub fn seeded_classifier(seed: u64, spec: &RandomSpec) -> Classifier {
    random_classifier(&mut ChaCha8Rng::seed_from_u64(seed), spec)
}

/// Every input assignment, or `limit` of them drawn without replacement when
/// there are more, in enumeration order.
pub fn inputs(c: &Classifier, limit: usize, rng: &mut impl Rng) -> Vec<Assignment> {
    let obs = c.observations();
    let sizes: Vec<usize> = obs.iter().map(|&x| c.domain(x).len()).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    let decode = |mut i: usize| {
        let mut a = c.empty_assignment();
        for (&x, &s) in obs.iter().zip(&sizes).rev() {
            a.set(x, i % s);
            i /= s;
        }
        a
    };
    match total {
        Some(t) if t <= limit => (0..t).map(decode).collect(),
        Some(t) => {
            let mut picked = index::sample(rng, t, limit).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(decode).collect()
        }
        None => (0..limit)
            .map(|_| {
                let mut a = c.empty_assignment();
                for (&x, &s) in obs.iter().zip(&sizes) {
                    a.set(x, rng.random_range(0..s));
                }
                a
            })
            .collect(),
    }
}
