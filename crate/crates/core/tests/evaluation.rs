mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::expected_rows;
use idx_core::attribution::{write_scores_csv, ScoreRecord};
use idx_core::evaluation::{
    agreement, check_propositions, complexity, inputs, monotonicity_violations, prevalence,
    seeded_classifier, EvalSettings, RandomSpec, Report,
};
use idx_core::fixtures::{self, non_monotone, NON_MONOTONE_INPUT};
use idx_core::kits::{
    Evaluator, KitDefinition, KitRegistry, Polarity, RelationDefinition, RelationProperty,
};
use idx_core::{Assignment, Classifier, Error, GraphKind, VarId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table_inputs(c: &Classifier) -> Vec<Assignment> {
    expected_rows()
        .iter()
        .map(|r| c.parse_assignment(&r.input).unwrap())
        .collect()
}

#[test]
fn md_prevalence_is_mean_printed_set_size_over_influences() {
    let c = fixtures::play_outside();
    let kit = KitRegistry::builtin().kit("md").unwrap();
    let report = prevalence(&c, &kit, &table_inputs(&c), &EvalSettings::default()).unwrap();
    let rows = expected_rows();
    let expect = |cols: [&str; 2]| {
        rows.iter()
            .map(|r| cols.iter().map(|c| r.set(c).len()).sum::<usize>() as f64 / 5.0)
            .sum::<f64>()
            / rows.len() as f64
            * 100.0
    };
    let support = &report.rows[1];
    assert_eq!(support.relation, "monotonic-support");
    assert!((support.percent - expect(["md_support_r", "md_support_o"])).abs() < 1e-9);
    assert!((report.rows[0].percent - expect(["md_attack_r", "md_attack_o"])).abs() < 1e-9);
    assert_eq!(report.influences, 5);
}

#[test]
fn classification_pair_prevalence_counts_only_r_to_o() {
    let c = fixtures::play_outside();
    let kit = KitRegistry::builtin().kit("sd").unwrap();
    let report = prevalence(&c, &kit, &table_inputs(&c), &EvalSettings::default()).unwrap();
    let rows = expected_rows();
    let with_r = |col: &str| {
        rows.iter().filter(|r| r.set(col).contains("r")).count() as f64 / rows.len() as f64 * 20.0
    };
    assert!((report.rows[0].classification_percent - with_r("sd_attack_o")).abs() < 1e-9);
    assert!((report.rows[1].classification_percent - with_r("sd_support_o")).abs() < 1e-9);

    let nbc = fixtures::play_outside_nbc();
    let report = prevalence(&nbc, &kit, &table_inputs(&nbc), &EvalSettings::default()).unwrap();
    assert!(report.rows.iter().all(|r| r.classification_percent == 0.0));
}

#[derive(Debug)]
struct Never;

impl RelationProperty for Never {
    fn name(&self) -> &str {
        "never"
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Full
    }
    fn holds(&self, _: &Evaluator<'_>, _: VarId, _: VarId) -> idx_core::Result<bool> {
        Ok(false)
    }
}

#[test]
fn constantly_false_kit_has_zero_prevalence() {
    let mut registry = KitRegistry::builtin();
    registry.register_property(Arc::new(Never)).unwrap();
    registry
        .register_kit(KitDefinition {
            name: "never".into(),
            attribution: None,
            relations: vec![RelationDefinition {
                label: "nothing".into(),
                symbol: "0".into(),
                polarity: Some(Polarity::Support),
                property: "never".into(),
            }],
        })
        .unwrap();
    let kit = registry.kit("never").unwrap();
    let c = fixtures::play_outside();
    let report = prevalence(&c, &kit, &table_inputs(&c), &EvalSettings::default()).unwrap();
    assert_eq!(report.rows[0].percent, 0.0);
}

#[test]
fn agreement_with_itself_is_total() {
    let c = fixtures::play_outside();
    let registry = KitRegistry::builtin();
    for name in ["md", "sd", "lime"] {
        let kit = registry.kit(name).unwrap();
        let mut settings = EvalSettings::default();
        settings.params.samples = 500;
        let r = agreement(&c, &kit, &kit, &table_inputs(&c), &settings).unwrap();
        assert_eq!(r.agreement, 100.0, "{name}");
        assert!(r.overlap <= 100.0);
    }
}

#[test]
fn md_and_sd_agree_fully_on_binary_classifiers() {
    let registry = KitRegistry::builtin();
    let (md, sd) = (registry.kit("md").unwrap(), registry.kit("sd").unwrap());
    for seed in 0..10 {
        let c = seeded_classifier(seed, &RandomSpec::binary());
        let inst = inputs(&c, 16, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = agreement(&c, &md, &sd, &inst, &EvalSettings::default()).unwrap();
        assert_eq!(r.agreement, 100.0, "seed {seed}");
    }
}

#[test]
fn md_sd_agreement_matches_set_arithmetic_on_printed_sets() {
    let c = fixtures::play_outside();
    let registry = KitRegistry::builtin();
    let (md, sd) = (registry.kit("md").unwrap(), registry.kit("sd").unwrap());
    let r = agreement(&c, &md, &sd, &table_inputs(&c), &EvalSettings::default()).unwrap();

    let rows = expected_rows();
    let mut same_total = 0.0;
    let mut overlap_total = 0.0;
    for row in &rows {
        let mut same = 0;
        let mut overlap = 0;
        for (y, influencers) in [("r", ["t", "p"].as_slice()), ("o", ["w", "t", "r"].as_slice())] {
            for x in influencers {
                let has = |col: String| row.set(&col).contains(*x);
                let (ma, ms) = (has(format!("md_attack_{y}")), has(format!("md_support_{y}")));
                let (sa, ss) = (has(format!("sd_attack_{y}")), has(format!("sd_support_{y}")));
                same += usize::from(ma == sa && ms == ss);
                overlap += usize::from((ma && sa) || (ms && ss));
            }
        }
        same_total += same as f64 / 5.0;
        overlap_total += overlap as f64 / 5.0;
    }
    let n = rows.len() as f64;
    assert!((r.agreement - 100.0 * same_total / n).abs() < 1e-9);
    assert!((r.overlap - 100.0 * overlap_total / n).abs() < 1e-9);
    assert!(r.agreement < 100.0);
}

#[test]
fn agreement_rejects_kits_without_polarity() {
    let c = fixtures::play_outside();
    let registry = KitRegistry::builtin();
    let (md, cf) = (registry.kit("md").unwrap(), registry.kit("cf").unwrap());
    assert!(matches!(
        agreement(&c, &md, &cf, &table_inputs(&c), &EvalSettings::default()),
        Err(Error::Evaluation(_))
    ));
}

#[test]
fn md_never_violates_monotonicity() {
    let md = KitRegistry::builtin().kit("md").unwrap();
    for seed in 0..15 {
        let c = seeded_classifier(seed, &RandomSpec::default());
        let inst = inputs(&c, 32, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = monotonicity_violations(&c, &md, &inst, 100, seed, &EvalSettings::default()).unwrap();
        assert_eq!(r.violations, 0, "seed {seed}");
        assert_eq!(r.rate, 0.0);
    }
}

#[test]
fn sd_violates_monotonicity_on_the_counterexample() {
    let c = non_monotone();
    let sd = KitRegistry::builtin().kit("sd").unwrap();
    let inst = vec![c.parse_assignment(NON_MONOTONE_INPUT).unwrap()];
    let r = monotonicity_violations(&c, &sd, &inst, 100, 0, &EvalSettings::default()).unwrap();
    assert!(r.violations > 0);
    assert_eq!(r.examples[0].influencer, "x");
    assert_eq!(r.examples[0].polarity, Polarity::Support);
}

#[test]
fn all_zero_scores_give_an_empty_sample() {
    let c = non_monotone();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.csv");
    let rows: Vec<ScoreRecord> = ["x", "z"]
        .iter()
        .map(|x| ScoreRecord {
            instance: "0".into(),
            observation: x.to_string(),
            output: "y".into(),
            score: 0.0,
        })
        .collect();
    write_scores_csv(std::fs::File::create(&path).unwrap(), &rows).unwrap();
    let settings = EvalSettings {
        attribution: Some(format!("file:{}", path.display())),
        ..EvalSettings::default()
    };
    let kit = KitRegistry::builtin().kit("lime").unwrap();
    let inst = vec![c.parse_assignment(NON_MONOTONE_INPUT).unwrap()];
    let r = monotonicity_violations(&c, &kit, &inst, 100, 0, &settings).unwrap();
    assert_eq!((r.sampled, r.violations, r.rate), (0, 0, 0.0));
}

#[test]
fn sampling_is_seeded_and_bounded() {
    let c = fixtures::play_outside();
    let sd = KitRegistry::builtin().kit("sd").unwrap();
    let inst = table_inputs(&c);
    let a = monotonicity_violations(&c, &sd, &inst, 10, 3, &EvalSettings::default()).unwrap();
    let b = monotonicity_violations(&c, &sd, &inst, 10, 3, &EvalSettings::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.sampled, 10);
    assert!(a.population > 10);
}

#[test]
fn complexity_of_running_example() {
    // Visited influences into o: w, t, r (into o) and t, p (into r), with domain
    // sizes 3, 3, 2, 3, 2: 1 + 2 + 2 + 1 + 2 + 1 = 9.
    let c = fixtures::play_outside();
    let settings = EvalSettings {
        outputs: vec!["o".into()],
        ..EvalSettings::default()
    };
    let a = vec![c.parse_assignment("w=l,t=m,p=l").unwrap()];
    for kit in ["md", "sd"] {
        let kit = KitRegistry::builtin().kit(kit).unwrap();
        let p = &complexity(&c, &kit, &a, &settings).unwrap().probes[0];
        assert_eq!((p.posterior_evaluations, p.linear_bound, p.reached), (9, 9, 5));
    }
}

#[test]
fn single_binary_influence_costs_two_evaluations() {
    let c = idx_core::ClassifierBuilder::new()
        .classification("y", &["0", "1"])
        .and_then(|b| b.observation("x", &["0", "1"]))
        .unwrap()
        .conditional("y", "x", &[&[0.7, 0.3], &[0.2, 0.8]])
        .build()
        .unwrap();
    let md = KitRegistry::builtin().kit("md").unwrap();
    let a = vec![c.parse_assignment("x=0").unwrap()];
    let r = complexity(&c, &md, &a, &EvalSettings::default()).unwrap();
    assert_eq!(r.probes[0].posterior_evaluations, 2);
    assert_eq!(r.matching(), 1);
}

#[test]
fn reports_render_as_csv_and_tables() {
    let c = fixtures::play_outside();
    let md = KitRegistry::builtin().kit("md").unwrap();
    let r = prevalence(&c, &md, &table_inputs(&c), &EvalSettings::default()).unwrap();
    let csv = r.to_csv().unwrap();
    assert!(csv.starts_with("kit,relation,symbol,percent,classification_percent,instances,influences\n"));
    assert_eq!(csv.lines().count(), 3);
    let table = r.to_table();
    assert!(table.lines().all(|l| l.starts_with('|') && l.ends_with('|')));
    let widths: BTreeSet<usize> = table.lines().map(|l| l.chars().count()).collect();
    assert_eq!(widths.len(), 1);
}

#[test]
fn proposition_suite_is_deterministic() {
    let a = check_propositions(11, 20).unwrap();
    let b = check_propositions(11, 20).unwrap();
    assert_eq!(a, b);
    assert!(a.results.iter().all(|r| r.checked > 0));
}

#[test]
fn empty_instance_lists_are_rejected() {
    let c = fixtures::play_outside();
    let md = KitRegistry::builtin().kit("md").unwrap();
    assert!(matches!(
        prevalence(&c, &md, &[], &EvalSettings::default()),
        Err(Error::Evaluation(_))
    ));
}
