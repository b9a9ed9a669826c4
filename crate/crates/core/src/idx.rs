//! Influence-driven explanations: generation, validation and rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::{escape, GraphKind};
use crate::kits::{Evaluator, ExplanationKit, Polarity, RelationType};
use crate::model::{Role, VarId};

/// Version tag of the JSON form.
pub const FORMAT: &str = "idx/1";

/// An explanation: relevant variables with their values, and one edge set per
/// relation type. Self-contained and name-based, so it can be rendered without
/// the classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Idx {
    pub format: String,
    pub kit: String,
    pub explanandum: String,
    /// The input assignment, observation name to value.
    pub input: BTreeMap<String, String>,
    /// Relevant variables with their decided values, in classifier order.
    pub nodes: Vec<IdxNode>,
    pub relations: Vec<IdxRelation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdxNode {
    pub name: String,
    pub value: String,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdxRelation {
    pub label: String,
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<Polarity>,
    /// `(influencer, influencee)` pairs.
    pub edges: Vec<(String, String)>,
}

impl Idx {
    pub fn relation(&self, label: &str) -> Option<&IdxRelation> {
        self.relations.iter().find(|r| r.label == label)
    }

    /// Edge set of the relation labelled `label` (empty if absent).
    pub fn edges(&self, label: &str) -> BTreeSet<(String, String)> {
        self.relation(label)
            .map(|r| r.edges.iter().cloned().collect())
            .unwrap_or_default()
    }

    /// Influencers of `y` under relation `label`.
    pub fn influencers(&self, label: &str, y: &str) -> BTreeSet<String> {
        self.edges(label)
            .into_iter()
            .filter(|(_, t)| t == y)
            .map(|(x, _)| x)
            .collect()
    }

    pub fn relevant(&self) -> BTreeSet<&str> {
        self.nodes.iter().map(|n| n.name.as_str()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let idx: Idx = serde_json::from_str(text)?;
        if idx.format != FORMAT {
            return Err(Error::Schema(format!(
                "unsupported explanation format `{}`, expected `{FORMAT}`",
                idx.format
            )));
        }
        Ok(idx)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Graphviz rendering: nodes labelled `name=value`, observations grey,
    /// edges labelled with relation symbols.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph idx {\n  rankdir=BT;\n");
        for n in &self.nodes {
            let fill = match n.role {
                Role::Observation => "grey",
                Role::Classification => "white",
            };
            let emphasis = if n.name == self.explanandum {
                ", penwidth=2"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  \"{}\" [label=\"{}={}\", style=filled, fillcolor={fill}{emphasis}];",
                escape(&n.name),
                escape(&n.name),
                escape(&n.value)
            );
        }
        for r in &self.relations {
            for (x, y) in &r.edges {
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [label=\"{}\"];",
                    escape(x),
                    escape(y),
                    escape(&r.symbol)
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

fn check_compatible(ev: &Evaluator<'_>, kit: &ExplanationKit, e: VarId) -> Result<()> {
    let c = ev.classifier();
    if e.0 >= c.len() {
        return Err(Error::UnknownVariable(e.to_string()));
    }
    if !c.is_classification(e) {
        return Err(Error::NotAClassification(c.name(e).to_string()));
    }
    let g = ev.graph();
    if kit.graph_kind() != g.kind() {
        return Err(Error::GraphMismatch {
            kit: kit.name().to_string(),
            expected: kit.graph_kind().as_str(),
            found: g.kind().as_str(),
        });
    }
    if g.kind() == GraphKind::Io && !g.outputs().contains(&e) {
        return Err(Error::InvalidConfig(format!(
            "explanandum `{}` is not one of the declared outputs",
            c.name(e)
        )));
    }
    Ok(())
}

/// Generates the explanation of `σ(a, e)` under `kit`.
///
/// Every influence reachable backwards from `e` is visited once and labelled with
/// each relation whose property holds; variables that do not reach `e` through
/// relation edges are then dropped.
pub fn generate(ev: &Evaluator<'_>, kit: &ExplanationKit, e: VarId) -> Result<Idx> {
    check_compatible(ev, kit, e)?;
    let g = ev.graph();
    let mut sets: Vec<BTreeSet<(VarId, VarId)>> = vec![BTreeSet::new(); kit.relations().len()];
    let mut expanded = BTreeSet::new();
    let mut stack = vec![e];
    while let Some(y) = stack.pop() {
        if !expanded.insert(y) {
            continue;
        }
        for &x in g.parents(y) {
            for (set, holds) in sets.iter_mut().zip(kit.classify(ev, x, y)?) {
                if holds {
                    set.insert((x, y));
                }
            }
            if !expanded.contains(&x) {
                stack.push(x);
            }
        }
    }

    let reach = connected_to(e, sets.iter().flatten().copied());
    for set in &mut sets {
        set.retain(|(_, y)| reach.contains(y));
    }
    Ok(assemble(ev, kit, e, &reach, &sets))
}

/// Variables with a directed path of `edges` into `e`, including `e`.
fn connected_to(e: VarId, edges: impl Iterator<Item = (VarId, VarId)>) -> BTreeSet<VarId> {
    let mut into: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
    for (x, y) in edges {
        into.entry(y).or_default().push(x);
    }
    let mut reach = BTreeSet::from([e]);
    let mut stack = vec![e];
    while let Some(y) = stack.pop() {
        for &x in into.get(&y).into_iter().flatten() {
            if reach.insert(x) {
                stack.push(x);
            }
        }
    }
    reach
}

fn assemble(
    ev: &Evaluator<'_>,
    kit: &ExplanationKit,
    e: VarId,
    relevant: &BTreeSet<VarId>,
    sets: &[BTreeSet<(VarId, VarId)>],
) -> Idx {
    let c = ev.classifier();
    let input = ev
        .input()
        .bound()
        .map(|(v, k)| (c.name(v).to_string(), c.label(v, k).to_string()))
        .collect();
    let nodes = relevant
        .iter()
        .map(|&v| IdxNode {
            name: c.name(v).to_string(),
            value: c.label(v, ev.value(v)).to_string(),
            role: c.role(v),
        })
        .collect();
    let relations = kit
        .relation_types()
        .zip(sets)
        .map(|(t, set)| IdxRelation {
            label: t.label.clone(),
            symbol: t.symbol.clone(),
            polarity: t.polarity,
            edges: set
                .iter()
                .map(|&(x, y)| (c.name(x).to_string(), c.name(y).to_string()))
                .collect(),
        })
        .collect();
    Idx {
        format: FORMAT.to_string(),
        kit: kit.name().to_string(),
        explanandum: c.name(e).to_string(),
        input,
        nodes,
        relations,
    }
}

/// A way in which an explanation fails to be an explanation for the input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Format { found: String },
    KitMismatch { expected: String, found: String },
    UnknownVariable { name: String },
    ExplanandumNotRelevant { explanandum: String },
    ValueMismatch { variable: String, recorded: String, actual: String },
    UnknownRelation { label: String },
    EdgeOutsideRelevant { label: String, edge: (String, String) },
    NotAnInfluence { label: String, edge: (String, String) },
    PredicateFails { label: String, edge: (String, String) },
    Disconnected { variable: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Format { found } => write!(f, "unsupported format `{found}`"),
            Violation::KitMismatch { expected, found } => {
                write!(f, "explanation was built with kit `{found}`, expected `{expected}`")
            }
            Violation::UnknownVariable { name } => write!(f, "unknown variable `{name}`"),
            Violation::ExplanandumNotRelevant { explanandum } => {
                write!(f, "explanandum `{explanandum}` is not a relevant variable")
            }
            Violation::ValueMismatch { variable, recorded, actual } => write!(
                f,
                "`{variable}` is recorded as `{recorded}` but the input gives `{actual}`"
            ),
            Violation::UnknownRelation { label } => write!(f, "relation `{label}` is not in the kit"),
            Violation::EdgeOutsideRelevant { label, edge } => write!(
                f,
                "{label} edge ({}, {}) leaves the relevant variables",
                edge.0, edge.1
            ),
            Violation::NotAnInfluence { label, edge } => {
                write!(f, "{label} edge ({}, {}) is not an influence", edge.0, edge.1)
            }
            Violation::PredicateFails { label, edge } => write!(
                f,
                "{label} does not hold for ({}, {}) under the input",
                edge.0, edge.1
            ),
            Violation::Disconnected { variable } => write!(
                f,
                "`{variable}` has no path of relation edges to the explanandum"
            ),
        }
    }
}

/// Re-checks membership, relation properties and connectivity of `idx` against
/// the evaluator's classifier, graph and input.
pub fn validate(idx: &Idx, ev: &Evaluator<'_>, kit: &ExplanationKit) -> Result<Vec<Violation>> {
    let c = ev.classifier();
    let g = ev.graph();
    let mut out = Vec::new();
    if idx.format != FORMAT {
        out.push(Violation::Format {
            found: idx.format.clone(),
        });
    }
    if idx.kit != kit.name() {
        out.push(Violation::KitMismatch {
            expected: kit.name().to_string(),
            found: idx.kit.clone(),
        });
    }
    let resolve = |name: &str, out: &mut Vec<Violation>| match c.var(name) {
        Ok(v) => Some(v),
        Err(_) => {
            out.push(Violation::UnknownVariable {
                name: name.to_string(),
            });
            None
        }
    };

    let mut relevant = BTreeSet::new();
    for n in &idx.nodes {
        let Some(v) = resolve(&n.name, &mut out) else { continue };
        relevant.insert(v);
        let actual = c.label(v, ev.value(v));
        if n.value != actual {
            out.push(Violation::ValueMismatch {
                variable: n.name.clone(),
                recorded: n.value.clone(),
                actual: actual.to_string(),
            });
        }
    }
    for (name, value) in &idx.input {
        let Some(v) = resolve(name, &mut out) else { continue };
        let actual = c.label(v, ev.value(v));
        if value != actual {
            out.push(Violation::ValueMismatch {
                variable: name.clone(),
                recorded: value.clone(),
                actual: actual.to_string(),
            });
        }
    }
    let e = resolve(&idx.explanandum, &mut out);
    if let Some(e) = e {
        if !relevant.contains(&e) {
            out.push(Violation::ExplanandumNotRelevant {
                explanandum: idx.explanandum.clone(),
            });
        }
    }

    let mut all_edges = Vec::new();
    for r in &idx.relations {
        let property = kit
            .relations()
            .iter()
            .find(|(t, _)| *t == RelationType::new(&r.label, &r.symbol, r.polarity));
        let Some((_, property)) = property else {
            out.push(Violation::UnknownRelation {
                label: r.label.clone(),
            });
            continue;
        };
        for (xs, ys) in &r.edges {
            let (Some(x), Some(y)) = (resolve(xs, &mut out), resolve(ys, &mut out)) else {
                continue;
            };
            let edge = (xs.clone(), ys.clone());
            if !relevant.contains(&x) || !relevant.contains(&y) {
                out.push(Violation::EdgeOutsideRelevant {
                    label: r.label.clone(),
                    edge: edge.clone(),
                });
            }
            if !g.contains((x, y)) {
                out.push(Violation::NotAnInfluence {
                    label: r.label.clone(),
                    edge,
                });
                continue;
            }
            all_edges.push((x, y));
            if !property.holds(ev, x, y)? {
                out.push(Violation::PredicateFails {
                    label: r.label.clone(),
                    edge,
                });
            }
        }
    }

    if let Some(e) = e {
        let reach = connected_to(e, all_edges.into_iter());
        for &v in &relevant {
            if !reach.contains(&v) {
                out.push(Violation::Disconnected {
                    variable: c.name(v).to_string(),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::influence::influences;
    use crate::kits::{EvaluatorOptions, KitRegistry};

    #[test]
    fn json_round_trip_and_format_tag() {
        let c = fixtures::play_outside();
        let g = influences(&c);
        let a = c.parse_assignment("w=l,t=m,p=l").unwrap();
        let ev = Evaluator::new(&c, &g, &a, EvaluatorOptions::default()).unwrap();
        let kit = KitRegistry::builtin().kit("md").unwrap();
        let idx = generate(&ev, &kit, c.var("o").unwrap()).unwrap();
        let back = Idx::from_json(&idx.to_json().unwrap()).unwrap();
        assert_eq!(back, idx);
        let mut wrong = idx.clone();
        wrong.format = "idx/0".into();
        assert!(Idx::from_json(&serde_json::to_string(&wrong).unwrap()).is_err());
    }

    #[test]
    fn single_node_dot() {
        let idx = Idx {
            format: FORMAT.into(),
            kit: "md".into(),
            explanandum: "o".into(),
            input: BTreeMap::new(),
            nodes: vec![IdxNode {
                name: "o".into(),
                value: "+".into(),
                role: Role::Classification,
            }],
            relations: vec![],
        };
        let dot = idx.to_dot();
        assert!(dot.contains("label=\"o=+\""));
        assert!(!dot.contains("->"));
    }
}
