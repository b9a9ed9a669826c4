//! Influence relations: the direction in which inference flows towards classifications.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Classifier, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// Every reversed dependency whose source is a classification.
    Full,
    /// Observations × outputs.
    Io,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Full => "full",
            GraphKind::Io => "io",
        }
    }
}

/// Acyclic influence relation `(influencer, influencee)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfluenceGraph {
    kind: GraphKind,
    edges: BTreeSet<(VarId, VarId)>,
    outputs: BTreeSet<VarId>,
    parents: Vec<Vec<VarId>>,
    children: Vec<Vec<VarId>>,
}

impl InfluenceGraph {
    fn from_edges(
        kind: GraphKind,
        n: usize,
        edges: BTreeSet<(VarId, VarId)>,
        outputs: BTreeSet<VarId>,
    ) -> Self {
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(x, y) in &edges {
            parents[y.0].push(x);
            children[x.0].push(y);
        }
        InfluenceGraph {
            kind,
            edges,
            outputs,
            parents,
            children,
        }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn edges(&self) -> &BTreeSet<(VarId, VarId)> {
        &self.edges
    }

    pub fn contains(&self, edge: (VarId, VarId)) -> bool {
        self.edges.contains(&edge)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Declared outputs (only meaningful for [`GraphKind::Io`]).
    pub fn outputs(&self) -> &BTreeSet<VarId> {
        &self.outputs
    }

    /// Influencers of `e`, in ascending variable order.
    pub fn parents(&self, e: VarId) -> &[VarId] {
        self.parents.get(e.0).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Variables influenced by `x`.
    pub fn children(&self, x: VarId) -> &[VarId] {
        self.children.get(x.0).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Edges reachable backwards from `e`: every influence that explanation
    /// generation visits.
    pub fn edges_reaching(&self, e: VarId) -> Vec<(VarId, VarId)> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![e];
        let mut out = Vec::new();
        while let Some(y) = stack.pop() {
            if !seen.insert(y) {
                continue;
            }
            for &x in self.parents(y) {
                out.push((x, y));
                stack.push(x);
            }
        }
        out.sort();
        out
    }

    /// Graphviz rendering with dashed edges.
    pub fn to_dot(&self, c: &Classifier) -> String {
        let mut out = String::from("digraph influences {\n  rankdir=BT;\n");
        let mut nodes: BTreeSet<VarId> = BTreeSet::new();
        for &(x, y) in &self.edges {
            nodes.insert(x);
            nodes.insert(y);
        }
        for v in nodes {
            let fill = if c.is_classification(v) { "white" } else { "grey" };
            let _ = writeln!(
                out,
                "  \"{}\" [style=filled, fillcolor={fill}];",
                escape(c.name(v))
            );
        }
        for &(x, y) in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [style=dashed];",
                escape(c.name(x)),
                escape(c.name(y))
            );
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Full influence graph: `{(x, c) | (c, x) ∈ dependencies, c a classification}`.
pub fn influences(c: &Classifier) -> InfluenceGraph {
    let edges = c
        .edges()
        .iter()
        .filter(|&&(p, _)| c.is_classification(p))
        .map(|&(p, ch)| (ch, p))
        .collect();
    InfluenceGraph::from_edges(GraphKind::Full, c.len(), edges, BTreeSet::new())
}

/// Input-output influences: every observation influences every output.
pub fn io_influences(c: &Classifier, outputs: &BTreeSet<VarId>) -> Result<InfluenceGraph> {
    for &o in outputs {
        if o.0 >= c.len() {
            return Err(Error::UnknownVariable(o.to_string()));
        }
        if !c.is_classification(o) {
            return Err(Error::NotAClassification(c.name(o).to_string()));
        }
    }
    let edges = c
        .observations()
        .into_iter()
        .flat_map(|x| outputs.iter().map(move |&y| (x, y)))
        .collect();
    Ok(InfluenceGraph::from_edges(
        GraphKind::Io,
        c.len(),
        edges,
        outputs.clone(),
    ))
}

/// Whether the full and input-output influence graphs have the same edges.
pub fn coincide(c: &Classifier, outputs: &BTreeSet<VarId>) -> Result<bool> {
    Ok(influences(c).edges() == io_influences(c, outputs)?.edges())
}

/// The structural characterisation: dependencies are exactly `outputs × observations`.
pub fn dependencies_are_output_product(c: &Classifier, outputs: &BTreeSet<VarId>) -> bool {
    let deps: BTreeSet<(VarId, VarId)> = c.edges().iter().copied().collect();
    let product: BTreeSet<(VarId, VarId)> = outputs
        .iter()
        .flat_map(|&o| c.observations().into_iter().map(move |x| (o, x)))
        .collect();
    deps == product
}

/// Resolves output names, defaulting to every classification.
pub fn resolve_outputs(c: &Classifier, names: &[String]) -> Result<BTreeSet<VarId>> {
    if names.is_empty() {
        return Ok(c.classifications().into_iter().collect());
    }
    names
        .iter()
        .map(|n| {
            let v = c.var(n)?;
            if !c.is_classification(v) {
                return Err(Error::NotAClassification(n.clone()));
            }
            Ok(v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn named(c: &Classifier, g: &InfluenceGraph) -> BTreeSet<(String, String)> {
        g.edges()
            .iter()
            .map(|&(x, y)| (c.name(x).to_string(), c.name(y).to_string()))
            .collect()
    }

    fn set(pairs: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn play_outside_influences() {
        let c = fixtures::play_outside();
        let g = influences(&c);
        assert_eq!(
            named(&c, &g),
            set(&[("w", "o"), ("t", "o"), ("r", "o"), ("t", "r"), ("p", "r")])
        );
        let names = |vs: &[VarId]| vs.iter().map(|&v| c.name(v).to_string()).collect::<Vec<_>>();
        let mut po = names(g.parents(c.var("o").unwrap()));
        po.sort();
        assert_eq!(po, ["r", "t", "w"]);
        assert!(g.parents(c.var("w").unwrap()).is_empty());
        let mut pr = names(g.parents(c.var("r").unwrap()));
        pr.sort();
        assert_eq!(pr, ["p", "t"]);
    }

    #[test]
    fn play_outside_io_influences() {
        let c = fixtures::play_outside();
        let o = c.var("o").unwrap();
        let r = c.var("r").unwrap();
        let g = io_influences(&c, &[o].into()).unwrap();
        assert_eq!(named(&c, &g), set(&[("w", "o"), ("t", "o"), ("p", "o")]));
        let g2 = io_influences(&c, &[o, r].into()).unwrap();
        assert_eq!(g2.len(), 6);
        assert!(g2.contains((c.var("w").unwrap(), r)));
        assert!(io_influences(&c, &BTreeSet::new()).unwrap().is_empty());
        assert!(io_influences(&c, &[c.var("w").unwrap()].into()).is_err());
    }

    #[test]
    fn coincidence_follows_structure() {
        let c = fixtures::play_outside();
        let o = c.var("o").unwrap();
        let r = c.var("r").unwrap();
        assert!(!coincide(&c, &[o].into()).unwrap());
        assert!(!coincide(&c, &[o, r].into()).unwrap());
        let nbc = fixtures::play_outside_nbc();
        let outs: BTreeSet<VarId> = nbc.classifications().into_iter().collect();
        assert!(coincide(&nbc, &outs).unwrap());
        assert!(dependencies_are_output_product(&nbc, &outs));
    }

    #[test]
    fn nbc_is_a_star() {
        let nbc = fixtures::play_outside_nbc();
        let g = influences(&nbc);
        assert_eq!(g.len(), nbc.observations().len());
    }

    #[test]
    fn dot_uses_dashed_edges() {
        let c = fixtures::play_outside();
        let dot = influences(&c).to_dot(&c);
        assert_eq!(dot.matches("style=dashed").count(), 5);
    }
}
