mod common;

use std::collections::BTreeSet;

use common::{expected_rows, fitted, PRINTED_PROBABILITIES, PRINTED_TOLERANCE, RELATION_COLUMNS};
use idx_core::fixtures::play_outside;
use idx_core::idx::generate;
use idx_core::influence::influences;
use idx_core::kits::{Evaluator, EvaluatorOptions, KitRegistry};

#[test]
fn fitted_probabilities_match_printed_table() {
    let c = play_outside();
    for &(given, var, value, printed) in PRINTED_PROBABILITIES {
        let p = fitted(&c, given, var, value);
        assert!(
            (p - printed).abs() < PRINTED_TOLERANCE,
            "P({var}={value} | {given}) = {p}, printed {printed}"
        );
    }
}

#[test]
fn decisions_match_every_row() {
    let c = play_outside();
    let (r, o) = (c.var("r").unwrap(), c.var("o").unwrap());
    for row in expected_rows() {
        let a = c.predict_all(&c.parse_assignment(&row.input).unwrap()).unwrap();
        assert_eq!(c.label(r, a.get(r).unwrap()), row.r, "r at {}", row.input);
        assert_eq!(c.label(o, a.get(o).unwrap()), row.o, "o at {}", row.input);
    }
}

#[test]
fn explanations_match_every_row() {
    let c = play_outside();
    let g = influences(&c);
    let registry = KitRegistry::builtin();
    for row in expected_rows() {
        let a = c.parse_assignment(&row.input).unwrap();
        let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
        for &(column, kit, label, y) in RELATION_COLUMNS {
            let kit = registry.kit(kit).unwrap();
            let idx = generate(&ev, &kit, c.var(y).unwrap()).unwrap();
            assert_eq!(
                &idx.influencers(label, y),
                row.set(column),
                "{column} at {}",
                row.input
            );
        }
    }
}

fn edges(pairs: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    pairs
        .iter()
        .map(|&(x, y)| (x.to_string(), y.to_string()))
        .collect()
}

#[test]
fn running_example_monotonic_and_counterfactual_structures() {
    let c = play_outside();
    let g = influences(&c);
    let registry = KitRegistry::builtin();
    let a = c.parse_assignment("w=l,t=m,p=l").unwrap();
    let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
    let o = c.var("o").unwrap();

    let md = generate(&ev, &registry.kit("md").unwrap(), o).unwrap();
    assert_eq!(md.edges("monotonic-support"), edges(&[("p", "r"), ("r", "o")]));
    assert_eq!(md.edges("monotonic-attack"), edges(&[("t", "o"), ("w", "o")]));
    assert_eq!(md.relevant(), BTreeSet::from(["o", "p", "r", "t", "w"]));

    let cf = generate(&ev, &registry.kit("cf").unwrap(), o).unwrap();
    assert_eq!(cf.edges("critical"), edges(&[("p", "r"), ("r", "o")]));
    assert!(cf.edges("potential").is_empty());
    assert_eq!(cf.relevant(), BTreeSet::from(["o", "p", "r"]));

    let sd = generate(&ev, &registry.kit("sd").unwrap(), o).unwrap();
    assert_eq!(
        sd.edges("stochastic-attack"),
        edges(&[("t", "o"), ("t", "r"), ("w", "o")])
    );
}
