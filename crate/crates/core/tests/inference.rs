mod common;

use common::{brute_force_decide, brute_force_posterior};
use idx_core::evaluation::{inputs, seeded_classifier, RandomSpec};
use idx_core::fixtures;
use idx_core::{Classifier, ClassifierBuilder, Error};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec() -> RandomSpec {
    RandomSpec {
        max_nodes: 6,
        ..RandomSpec::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posteriors_are_distributions_matching_enumeration(seed in 0u64..10_000) {
        let c = seeded_classifier(seed, &spec());
        for a in inputs(&c, 8, &mut ChaCha8Rng::seed_from_u64(seed)) {
            let decided = c.predict_all(&a).unwrap();
            for x in c.classifications() {
                let post = c.posterior(&a, x).unwrap();
                let total: f64 = post.probs.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                for (p, q) in post.probs.iter().zip(brute_force_posterior(&c, &a, x)) {
                    prop_assert!((p - q).abs() < 1e-9);
                }
                prop_assert_eq!(decided.get(x), Some(brute_force_decide(&c, &a, x)));
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_decisions(seed in 0u64..10_000) {
        let c = seeded_classifier(seed, &spec());
        let back = Classifier::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), c.to_json().unwrap());
        for a in inputs(&c, 4, &mut ChaCha8Rng::seed_from_u64(seed)) {
            prop_assert_eq!(c.predict_all(&a).unwrap(), back.predict_all(&a).unwrap());
        }
    }
}

#[test]
fn running_example_posterior_follows_printed_tables() {
    let c = fixtures::play_outside();
    let a = c.parse_assignment("w=l,t=m,p=l").unwrap();
    // P(r=+ | t=m, p=l) recomputed from the printed prior and conditionals.
    let plus = 0.67 * 0.25 * 0.75;
    let minus = 0.33 * 0.49 * 0.02;
    let expected = plus / (plus + minus);
    let r = c.var("r").unwrap();
    let p = c.posterior(&a, r).unwrap().prob(c.value(r, "+").unwrap());
    assert!((p - expected).abs() < 0.01, "{p} vs {expected}");
}

#[test]
fn ties_go_to_the_first_value() {
    let c = ClassifierBuilder::new()
        .classification("y", &["first", "second"])
        .and_then(|b| b.observation("x", &["a", "b"]))
        .unwrap()
        .conditional("y", "x", &[&[0.5, 0.5], &[0.5, 0.5]])
        .build()
        .unwrap();
    let a = c.parse_assignment("x=b").unwrap();
    assert_eq!(c.decide(&a, c.var("y").unwrap()).unwrap(), 0);
}

#[test]
fn many_children_use_log_space_without_underflow() {
    let mut b = ClassifierBuilder::new().classification("y", &["u", "v"]).unwrap();
    let names: Vec<String> = (0..400).map(|i| format!("x{i}")).collect();
    for n in &names {
        b = b
            .observation(n, &["a", "b"])
            .unwrap()
            .conditional("y", n, &[&[0.1, 0.9], &[0.2, 0.8]]);
    }
    let c = b.build().unwrap();
    let text: Vec<String> = names.iter().map(|n| format!("{n}=a")).collect();
    let a = c.parse_assignment(&text.join(",")).unwrap();
    let post = c.posterior(&a, c.var("y").unwrap()).unwrap();
    assert!(post.probs.iter().all(|p| p.is_finite()));
    assert_eq!(post.argmax(), 1);
}

#[test]
fn incomplete_and_invalid_inputs_are_rejected() {
    let c = fixtures::play_outside();
    let r = c.var("r").unwrap();
    let partial = c.parse_assignment("w=l,t=m").unwrap();
    assert!(matches!(c.posterior(&partial, r), Err(Error::IncompleteInput(_))));
    assert!(matches!(
        c.parse_assignment("w=x,t=m,p=l"),
        Err(Error::ValueOutsideDomain { .. })
    ));
    assert!(matches!(
        c.parse_assignment("q=l"),
        Err(Error::UnknownVariable(_))
    ));
}

#[test]
fn observation_parents_are_rejected() {
    let err = ClassifierBuilder::new()
        .classification("y", &["0", "1"])
        .and_then(|b| b.observation("x", &["0", "1"]))
        .and_then(|b| b.observation("z", &["0", "1"]))
        .unwrap()
        .conditional("y", "x", &[&[0.5, 0.5], &[0.5, 0.5]])
        .conditional("x", "z", &[&[0.5, 0.5], &[0.5, 0.5]])
        .build()
        .unwrap_err();
    assert!(err.to_string().contains("leaves"));
}

#[test]
fn malformed_tables_are_rejected() {
    let err = ClassifierBuilder::new()
        .classification("y", &["0", "1"])
        .and_then(|b| b.observation("x", &["0", "1"]))
        .unwrap()
        .conditional("y", "x", &[&[0.5, 0.6], &[0.5, 0.5]])
        .build()
        .unwrap_err();
    assert!(matches!(err, Error::InvalidClassifier(_)));
}
