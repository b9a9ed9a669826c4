use std::collections::BTreeSet;
use std::sync::Arc;

use idx_core::attribution::{AttributionParams, AttributionRegistry};
use idx_core::fixtures::play_outside;
use idx_core::idx::{generate, validate, Idx, IdxNode, Violation, FORMAT};
use idx_core::influence::{influences, io_influences};
use idx_core::kits::{
    Evaluator, EvaluatorOptions, KitDefinition, KitRegistry, Polarity, RelationDefinition,
    RelationProperty,
};
use idx_core::{Error, GraphKind, Role, VarId};

const INPUT: &str = "w=l,t=m,p=l";

#[test]
fn generated_explanations_validate_clean() {
    let c = play_outside();
    let g = influences(&c);
    let registry = KitRegistry::builtin();
    for input in ["w=l,t=m,p=l", "w=h,t=h,p=h", "w=m,t=l,p=h"] {
        let a = c.parse_assignment(input).unwrap();
        let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
        for kit in ["md", "sd", "cf", "cf-local"] {
            let kit = registry.kit(kit).unwrap();
            for e in c.classifications() {
                let idx = generate(&ev, &kit, e).unwrap();
                assert_eq!(validate(&idx, &ev, &kit).unwrap(), vec![], "{input} {}", kit.name());
                assert_eq!(idx, generate(&ev, &kit, e).unwrap());
            }
        }
    }
}

#[test]
fn attribution_explanations_use_the_output_graph() {
    let c = play_outside();
    let o = c.var("o").unwrap();
    let g = io_influences(&c, &BTreeSet::from([o])).unwrap();
    let params = AttributionParams {
        samples: 500,
        ..AttributionParams::default()
    };
    let source = AttributionRegistry::builtin().source("surrogate", &params).unwrap();
    let options = EvaluatorOptions {
        attribution: Some(source),
        ..EvaluatorOptions::default()
    };
    let a = c.parse_assignment(INPUT).unwrap();
    let ev = Evaluator::new(&c, &g, &a, options).unwrap();
    let kit = KitRegistry::builtin().kit("lime").unwrap();
    let idx = generate(&ev, &kit, o).unwrap();
    assert!(idx.relevant().iter().all(|v| ["o", "w", "t", "p"].contains(v)));
    assert_eq!(validate(&idx, &ev, &kit).unwrap(), vec![]);
}

#[test]
fn dangling_variable_is_one_connectivity_violation() {
    let c = play_outside();
    let g = influences(&c);
    let a = c.parse_assignment(INPUT).unwrap();
    let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
    let kit = KitRegistry::builtin().kit("cf").unwrap();
    let mut idx = generate(&ev, &kit, c.var("o").unwrap()).unwrap();
    assert!(!idx.relevant().contains("w"));
    idx.nodes.push(IdxNode {
        name: "w".into(),
        value: "l".into(),
        role: Role::Observation,
    });
    assert_eq!(
        validate(&idx, &ev, &kit).unwrap(),
        vec![Violation::Disconnected { variable: "w".into() }]
    );
}

#[test]
fn misplaced_edge_is_one_predicate_violation() {
    let c = play_outside();
    let g = influences(&c);
    let a = c.parse_assignment(INPUT).unwrap();
    let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
    let kit = KitRegistry::builtin().kit("md").unwrap();
    let mut idx = generate(&ev, &kit, c.var("o").unwrap()).unwrap();
    // w attacks o under this input, so claiming support must fail on re-evaluation.
    let support = idx
        .relations
        .iter_mut()
        .find(|r| r.label == "monotonic-support")
        .unwrap();
    support.edges.push(("w".into(), "o".into()));
    let violations = validate(&idx, &ev, &kit).unwrap();
    assert_eq!(
        violations,
        vec![Violation::PredicateFails {
            label: "monotonic-support".into(),
            edge: ("w".into(), "o".into()),
        }]
    );
}

#[test]
fn validator_reports_foreign_kits_and_wrong_values() {
    let c = play_outside();
    let g = influences(&c);
    let a = c.parse_assignment(INPUT).unwrap();
    let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
    let registry = KitRegistry::builtin();
    let mut idx = generate(&ev, &registry.kit("md").unwrap(), c.var("o").unwrap()).unwrap();
    idx.nodes.iter_mut().find(|n| n.name == "t").unwrap().value = "h".into();
    let violations = validate(&idx, &ev, &registry.kit("sd").unwrap()).unwrap();
    assert!(violations.iter().any(|v| matches!(v, Violation::KitMismatch { .. })));
    assert!(violations
        .iter()
        .any(|v| matches!(v, Violation::ValueMismatch { variable, .. } if variable == "t")));
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
fn constantly_false_kit_explains_with_the_explanandum_alone() {
    let mut registry = KitRegistry::builtin();
    registry.register_property(Arc::new(Never)).unwrap();
    registry
        .register_kit(KitDefinition {
            name: "never".into(),
            attribution: None,
            relations: vec![RelationDefinition {
                label: "nothing".into(),
                symbol: "0".into(),
                polarity: Some(Polarity::Attack),
                property: "never".into(),
            }],
        })
        .unwrap();
    let kit = registry.kit("never").unwrap();
    let c = play_outside();
    let g = influences(&c);
    let a = c.parse_assignment(INPUT).unwrap();
    let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
    let idx = generate(&ev, &kit, c.var("o").unwrap()).unwrap();
    assert_eq!(idx.relevant(), BTreeSet::from(["o"]));
    assert!(idx.relations.iter().all(|r| r.edges.is_empty()));
    let dot = idx.to_dot();
    assert_eq!(dot.lines().filter(|l| l.contains("[label=\"o=")).count(), 1);
    assert!(!dot.contains("->"));
}

#[test]
fn monotonic_running_example_renders_five_nodes_and_four_edges() {
    let c = play_outside();
    let g = influences(&c);
    let a = c.parse_assignment(INPUT).unwrap();
    let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
    let idx = generate(&ev, &KitRegistry::builtin().kit("md").unwrap(), c.var("o").unwrap()).unwrap();
    let dot = idx.to_dot();
    let nodes = dot.lines().filter(|l| l.contains("fillcolor")).count();
    let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
    assert_eq!(nodes, 5);
    assert_eq!(edges.len(), 4);
    assert!(edges.iter().all(|l| l.contains("[label=\"")));
    assert!(dot.contains("\"p\" -> \"r\" [label=\"+\"]"));
    assert!(dot.contains("\"w\" -> \"o\" [label=\"\u{2212}\"]"));
}

#[test]
fn json_round_trip_is_structural_identity() {
    let c = play_outside();
    let g = influences(&c);
    let a = c.parse_assignment(INPUT).unwrap();
    let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
    for kit in ["md", "sd", "cf"] {
        let kit = KitRegistry::builtin().kit(kit).unwrap();
        let idx = generate(&ev, &kit, c.var("o").unwrap()).unwrap();
        assert_eq!(idx.format, FORMAT);
        assert_eq!(Idx::from_json(&idx.to_json().unwrap()).unwrap(), idx);
    }
    let mut other = generate(&ev, &KitRegistry::builtin().kit("md").unwrap(), c.var("o").unwrap()).unwrap();
    other.format = "idx/0".into();
    assert!(matches!(
        Idx::from_json(&other.to_json().unwrap()),
        Err(Error::Schema(_))
    ));
}

#[test]
fn incompatible_requests_are_rejected() {
    let c = play_outside();
    let o = c.var("o").unwrap();
    let io = io_influences(&c, &BTreeSet::from([o])).unwrap();
    let a = c.parse_assignment(INPUT).unwrap();
    let ev = Evaluator::new(&c, &io, &a, EvaluatorOptions::default()).unwrap();
    let registry = KitRegistry::builtin();
    assert!(matches!(
        generate(&ev, &registry.kit("md").unwrap(), o),
        Err(Error::GraphMismatch { .. })
    ));
    let lime = registry.kit("lime").unwrap();
    assert!(matches!(
        generate(&ev, &lime, c.var("r").unwrap()),
        Err(Error::InvalidConfig(_))
    ));
    let full = influences(&c);
    let ev = Evaluator::new(&c, &full, &a, EvaluatorOptions::default()).unwrap();
    assert!(matches!(
        generate(&ev, &registry.kit("md").unwrap(), c.var("w").unwrap()),
        Err(Error::NotAClassification(_))
    ));
}
