//! Discrete Bayesian network classifiers.
//!
//! A [`Classifier`] partitions its variables into observations (always bound by an
//! input) and classifications (decided by the classifier). Every classification is
//! estimated by a naive Bayes classifier whose inputs are its children in the
//! dependency DAG; conditionals are stored pairwise, one table per dependency edge.

mod format;
mod inference;

pub use format::ClassifierDocument;
pub use inference::PosteriorDistribution;
pub(crate) use inference::argmax;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the normalisation of prior rows and conditional columns.
pub const NORMALISATION_TOLERANCE: f64 = 1e-9;

/// Index of a variable inside its [`Classifier`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Observation,
    Classification,
}

/// Ordered set of categorical value labels. The order is used for tie-breaking.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Domain {
    values: Vec<String>,
}

impl Domain {
    pub fn new<S: Into<String>>(values: impl IntoIterator<Item = S>) -> Result<Self> {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.len() < 2 {
            return Err(Error::InvalidClassifier(format!(
                "a domain needs at least two values, got {values:?}"
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::InvalidClassifier(format!("duplicate domain value `{v}`")));
            }
        }
        Ok(Domain { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn label(&self, index: usize) -> &str {
        &self.values[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }
}

impl TryFrom<Vec<String>> for Domain {
    type Error = Error;

    fn try_from(values: Vec<String>) -> Result<Self> {
        Domain::new(values)
    }
}

impl From<Domain> for Vec<String> {
    fn from(d: Domain) -> Self {
        d.values
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub role: Role,
    pub domain: Domain,
}

/// Partial mapping from variables to value indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    values: Vec<Option<usize>>,
}

impl Assignment {
    /// An assignment binding nothing, sized for `len` variables.
    pub fn unbound(len: usize) -> Self {
        Assignment {
            values: vec![None; len],
        }
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.values.get(var.0).copied().flatten()
    }

    pub fn is_bound(&self, var: VarId) -> bool {
        self.get(var).is_some()
    }

    pub fn set(&mut self, var: VarId, value: usize) {
        self.values[var.0] = Some(value);
    }

    pub fn unset(&mut self, var: VarId) {
        self.values[var.0] = None;
    }

    pub fn with(mut self, var: VarId, value: usize) -> Self {
        self.set(var, value);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bound(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (VarId(i), v)))
    }

    pub(crate) fn raw(&self) -> &[Option<usize>] {
        &self.values
    }
}

/// A discrete Bayesian network classifier with pairwise-factored conditionals.
#[derive(Clone, Debug)]
pub struct Classifier {
    variables: Vec<Variable>,
    edges: Vec<(VarId, VarId)>,
    priors: Vec<Vec<f64>>,
    /// `(parent, child) -> table[parent_value][child_value]`
    conditionals: BTreeMap<(VarId, VarId), Vec<Vec<f64>>>,
    children: Vec<Vec<VarId>>,
    parents: Vec<Vec<VarId>>,
    topological: Vec<VarId>,
    by_name: HashMap<String, VarId>,
    warnings: Vec<String>,
    cuts: BTreeMap<String, Vec<f64>>,
}

impl Classifier {
    /// Builds and validates a classifier.
    ///
    /// `edges` are dependency edges `(parent, child)`; `conditionals` must hold one
    /// table per edge, indexed `[parent_value][child_value]`.
    pub fn new(
        variables: Vec<Variable>,
        edges: Vec<(VarId, VarId)>,
        priors: Vec<Vec<f64>>,
        conditionals: BTreeMap<(VarId, VarId), Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let n = variables.len();
        let mut by_name = HashMap::with_capacity(n);
        for (i, v) in variables.iter().enumerate() {
            if by_name.insert(v.name.clone(), VarId(i)).is_some() {
                return Err(Error::InvalidClassifier(format!(
                    "duplicate variable name `{}`",
                    v.name
                )));
            }
        }

        let mut edges = edges;
        edges.sort();
        edges.dedup();
        let mut children = vec![Vec::new(); n];
        let mut parents = vec![Vec::new(); n];
        for &(p, c) in &edges {
            if p.0 >= n || c.0 >= n {
                return Err(Error::InvalidClassifier(format!("edge {p} -> {c} out of range")));
            }
            if p == c {
                return Err(Error::InvalidClassifier(format!(
                    "self-dependency on `{}`",
                    variables[p.0].name
                )));
            }
            if variables[p.0].role == Role::Observation {
                return Err(Error::InvalidClassifier(format!(
                    "observation `{}` has a child `{}`; observations must be leaves",
                    variables[p.0].name, variables[c.0].name
                )));
            }
            children[p.0].push(c);
            parents[c.0].push(p);
        }

        let topological = topological_order(n, &children).ok_or_else(|| {
            Error::InvalidClassifier("dependency graph contains a cycle".into())
        })?;

        if priors.len() != n {
            return Err(Error::InvalidClassifier(format!(
                "expected {n} prior rows, got {}",
                priors.len()
            )));
        }
        for (v, row) in variables.iter().zip(&priors) {
            check_distribution(row, v.domain.len(), || format!("prior of `{}`", v.name))?;
        }

        for &(p, c) in &edges {
            let table = conditionals.get(&(p, c)).ok_or_else(|| {
                Error::InvalidClassifier(format!(
                    "missing conditional table for `{}` given `{}`",
                    variables[c.0].name, variables[p.0].name
                ))
            })?;
            let pv = &variables[p.0];
            let cv = &variables[c.0];
            if table.len() != pv.domain.len() {
                return Err(Error::InvalidClassifier(format!(
                    "conditional of `{}` given `{}` has {} columns, expected {}",
                    cv.name,
                    pv.name,
                    table.len(),
                    pv.domain.len()
                )));
            }
            for (j, column) in table.iter().enumerate() {
                check_distribution(column, cv.domain.len(), || {
                    format!("P({} | {}={})", cv.name, pv.name, pv.domain.label(j))
                })?;
            }
        }
        if let Some(&(p, c)) = conditionals.keys().find(|k| edges.binary_search(k).is_err()) {
            return Err(Error::InvalidClassifier(format!(
                "conditional table for `{}` given `{}` has no matching edge",
                variables[c.0].name, variables[p.0].name
            )));
        }

        Ok(Classifier {
            variables,
            edges,
            priors,
            conditionals,
            children,
            parents,
            topological,
            by_name,
            warnings: Vec::new(),
            cuts: BTreeMap::new(),
        })
    }

    pub fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings = warnings;
        self
    }

    /// Attaches the cut-points used to bucket numeric columns during fitting.
    pub fn with_cuts(mut self, cuts: BTreeMap<String, Vec<f64>>) -> Self {
        self.cuts = cuts;
        self
    }

    /// Cut-points of discretized variables, keyed by variable name.
    pub fn cuts(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.cuts
    }

    /// Diagnostics attached during fitting (e.g. zero-probability rows).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.variables[id.0].name
    }

    pub fn domain(&self, id: VarId) -> &Domain {
        &self.variables[id.0].domain
    }

    pub fn role(&self, id: VarId) -> Role {
        self.variables[id.0].role
    }

    pub fn is_classification(&self, id: VarId) -> bool {
        self.role(id) == Role::Classification
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn observations(&self) -> Vec<VarId> {
        self.ids().filter(|&v| !self.is_classification(v)).collect()
    }

    pub fn classifications(&self) -> Vec<VarId> {
        self.ids().filter(|&v| self.is_classification(v)).collect()
    }

    /// Dependency edges `(parent, child)` in sorted order.
    pub fn edges(&self) -> &[(VarId, VarId)] {
        &self.edges
    }

    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id.0]
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.parents[id.0]
    }

    /// Variables in an order where every parent precedes its children.
    pub fn topological_order(&self) -> &[VarId] {
        &self.topological
    }

    pub fn prior(&self, id: VarId) -> &[f64] {
        &self.priors[id.0]
    }

    /// `table[parent_value][child_value]` for the edge `parent -> child`.
    pub fn conditional(&self, parent: VarId, child: VarId) -> Option<&[Vec<f64>]> {
        self.conditionals.get(&(parent, child)).map(Vec::as_slice)
    }

    pub fn var(&self, name: &str) -> Result<VarId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn value(&self, var: VarId, label: &str) -> Result<usize> {
        self.domain(var)
            .index_of(label)
            .ok_or_else(|| Error::ValueOutsideDomain {
                variable: self.name(var).to_string(),
                value: label.to_string(),
            })
    }

    pub fn label(&self, var: VarId, value: usize) -> &str {
        self.domain(var).label(value)
    }

    pub fn empty_assignment(&self) -> Assignment {
        Assignment::unbound(self.len())
    }

    /// Builds an assignment from `(variable, value)` label pairs.
    pub fn assignment<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Assignment> {
        let mut a = self.empty_assignment();
        for (name, label) in pairs {
            let var = self.var(name)?;
            a.set(var, self.value(var, label)?);
        }
        Ok(a)
    }

    /// Parses `name=value,name=value` literals.
    pub fn parse_assignment(&self, text: &str) -> Result<Assignment> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("expected `name=value`, got `{item}`"))
            })?;
            pairs.push((k.trim(), v.trim()));
        }
        self.assignment(pairs)
    }

    /// Renders the bound part of an assignment as `name=value,...` in variable order.
    pub fn format_assignment(&self, a: &Assignment) -> String {
        a.bound()
            .map(|(v, x)| format!("{}={}", self.name(v), self.label(v, x)))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn check_distribution(row: &[f64], expected_len: usize, what: impl Fn() -> String) -> Result<()> {
    if row.len() != expected_len {
        return Err(Error::InvalidClassifier(format!(
            "{} has {} entries, expected {expected_len}",
            what(),
            row.len()
        )));
    }
    if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidClassifier(format!(
            "{} has entries outside [0, 1]: {row:?}",
            what()
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > NORMALISATION_TOLERANCE {
        return Err(Error::InvalidClassifier(format!("{} sums to {sum}", what())));
    }
    Ok(())
}

/// Kahn's algorithm; ties resolved by index so the order is deterministic.
fn topological_order(n: usize, children: &[Vec<VarId>]) -> Option<Vec<VarId>> {
    let mut indegree = vec![0usize; n];
    for cs in children {
        for c in cs {
            indegree[c.0] += 1;
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(VarId(i));
        for c in &children[i] {
            indegree[c.0] -= 1;
            if indegree[c.0] == 0 {
                ready.insert(c.0);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Name-based construction of classifiers, mostly for fixtures and tests.
#[derive(Debug, Default)]
pub struct ClassifierBuilder {
    variables: Vec<Variable>,
    edges: Vec<(String, String)>,
    priors: HashMap<String, Vec<f64>>,
    conditionals: Vec<(String, String, Vec<Vec<f64>>)>,
}

impl ClassifierBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observation(mut self, name: &str, domain: &[&str]) -> Result<Self> {
        self.variables.push(Variable {
            name: name.to_string(),
            role: Role::Observation,
            domain: Domain::new(domain.iter().copied())?,
        });
        Ok(self)
    }

    pub fn classification(mut self, name: &str, domain: &[&str]) -> Result<Self> {
        self.variables.push(Variable {
            name: name.to_string(),
            role: Role::Classification,
            domain: Domain::new(domain.iter().copied())?,
        });
        Ok(self)
    }

    pub fn prior(mut self, name: &str, probs: &[f64]) -> Self {
        self.priors.insert(name.to_string(), probs.to_vec());
        self
    }

    /// Adds the edge `parent -> child` with `table[parent_value][child_value]`.
    pub fn conditional(mut self, parent: &str, child: &str, table: &[&[f64]]) -> Self {
        self.edges.push((parent.to_string(), child.to_string()));
        self.conditionals.push((
            parent.to_string(),
            child.to_string(),
            table.iter().map(|r| r.to_vec()).collect(),
        ));
        self
    }

    pub fn build(self) -> Result<Classifier> {
        let index: HashMap<&str, VarId> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), VarId(i)))
            .collect();
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::UnknownVariable(n.to_string()))
        };
        let mut priors = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let row = self.priors.get(&v.name).cloned().unwrap_or_else(|| {
                vec![1.0 / v.domain.len() as f64; v.domain.len()]
            });
            priors.push(row);
        }
        let mut edges = Vec::new();
        for (p, c) in &self.edges {
            edges.push((lookup(p)?, lookup(c)?));
        }
        let mut conditionals = BTreeMap::new();
        for (p, c, t) in self.conditionals {
            conditionals.insert((lookup(&p)?, lookup(&c)?), t);
        }
        Classifier::new(self.variables, edges, priors, conditionals)
    }
}
