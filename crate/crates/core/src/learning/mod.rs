//! Fitting classifiers from categorical data: discretization, Laplace-smoothed
//! counting, naive and chain structures, and seeded splits.

mod config;
mod dataset;
mod discretize;
mod split;

pub use config::{Attach, ChainConfig, Hyperparams, LearnConfig, SplitConfig, StructureConfig};
pub use dataset::{ColumnKind, Dataset};
pub use discretize::{bucket, bucket_label, cut_points, discretize, BinSpec};
pub use split::{split, Split};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{Assignment, Classifier, Domain, Role, VarId, Variable};

/// Applies declared domains and bins, then fits the configured structure.
pub fn fit(d: &Dataset, cfg: &LearnConfig) -> Result<Classifier> {
    cfg.validate()?;
    let (data, cuts) = prepare(d, cfg)?;
    let h = cfg.hyperparams();
    let classifier = if let Some(structure) = &cfg.structure {
        let classes = if cfg.classes.is_empty() {
            structure.edges.iter().map(|(p, _)| p.clone()).collect()
        } else {
            cfg.classes.clone()
        };
        fit_structure(&data, &classes, &structure.edges, &h)?
    } else {
        match cfg.classes.as_slice() {
            [] => {
                return Err(Error::InvalidConfig(
                    "no class columns: set `classes` or `structure.edges`".into(),
                ))
            }
            [class] => fit_nbc(&data, class, &h)?,
            classes => fit_bcc(&data, classes, &h, None, cfg.chain.root.as_deref(), cfg.chain.attach)?,
        }
    };
    Ok(classifier.with_cuts(cuts))
}

/// Declared domains plus discretization of numeric columns.
pub fn prepare(d: &Dataset, cfg: &LearnConfig) -> Result<(Dataset, BTreeMap<String, Vec<f64>>)> {
    let mut data = d.clone();
    for (col, values) in &cfg.domains {
        data.declare_domain(col, values.clone())?;
    }
    discretize(&data, &cfg.bins)
}

/// Naive Bayes classifier: `class` is the parent of every other column.
pub fn fit_nbc(d: &Dataset, class: &str, h: &Hyperparams) -> Result<Classifier> {
    d.column_index(class)?;
    let edges: Vec<(String, String)> = d
        .columns()
        .iter()
        .filter(|c| *c != class)
        .map(|c| (class.to_string(), c.clone()))
        .collect();
    fit_structure(d, &[class.to_string()], &edges, h)
}

/// Chain classifier over `classes`.
///
/// Without an explicit class `tree`, classes are linked by the maximum spanning tree
/// of pairwise mutual information, oriented away from `root` (default: the class
/// with the highest summed mutual information). Observations become children of
/// every class, or only of the leaf classes with [`Attach::Leaves`].
pub fn fit_bcc(
    d: &Dataset,
    classes: &[String],
    h: &Hyperparams,
    tree: Option<&[(String, String)]>,
    root: Option<&str>,
    attach: Attach,
) -> Result<Classifier> {
    if classes.is_empty() {
        return Err(Error::InvalidConfig("a chain needs at least one class".into()));
    }
    let class_edges = match tree {
        Some(t) => t.to_vec(),
        None => class_tree(d, classes, root)?,
    };
    let with_children: BTreeSet<&str> = class_edges.iter().map(|(p, _)| p.as_str()).collect();
    let hosts: Vec<&String> = match attach {
        Attach::All => classes.iter().collect(),
        Attach::Leaves => classes
            .iter()
            .filter(|c| !with_children.contains(c.as_str()))
            .collect(),
    };
    let mut edges = class_edges.clone();
    for obs in d.columns().iter().filter(|c| !classes.contains(c)) {
        for host in &hosts {
            edges.push(((*host).clone(), obs.clone()));
        }
    }
    fit_structure(d, classes, &edges, h)
}

/// Plug-in mutual information (natural log) between two categorical columns.
pub fn mutual_information(d: &Dataset, a: &str, b: &str) -> Result<f64> {
    let (ja, jb) = (d.column_index(a)?, d.column_index(b)?);
    let n = d.len() as f64;
    if d.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    let mut joint: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    let mut ma: BTreeMap<&str, f64> = BTreeMap::new();
    let mut mb: BTreeMap<&str, f64> = BTreeMap::new();
    for row in d.rows() {
        *joint.entry((&row[ja], &row[jb])).or_default() += 1.0;
        *ma.entry(&row[ja]).or_default() += 1.0;
        *mb.entry(&row[jb]).or_default() += 1.0;
    }
    Ok(joint
        .iter()
        .map(|((x, y), &c)| c / n * (c * n / (ma[x] * mb[y])).ln())
        .sum::<f64>()
        .max(0.0))
}

/// Maximum spanning tree over `classes` weighted by mutual information, as
/// `(parent, child)` edges oriented away from the root.
pub fn class_tree(d: &Dataset, classes: &[String], root: Option<&str>) -> Result<Vec<(String, String)>> {
    let unique: BTreeSet<&String> = classes.iter().collect();
    if unique.len() != classes.len() {
        return Err(Error::InvalidConfig("duplicate class names".into()));
    }
    let k = classes.len();
    let mut mi = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = mutual_information(d, &classes[i], &classes[j])?;
            mi[i][j] = v;
            mi[j][i] = v;
        }
    }
    let root = match root {
        Some(r) => classes
            .iter()
            .position(|c| c == r)
            .ok_or_else(|| Error::InvalidConfig(format!("chain root `{r}` is not a class")))?,
        None => {
            let sums: Vec<f64> = mi.iter().map(|row| row.iter().sum()).collect();
            (0..k).fold(0, |best, i| if sums[i] > sums[best] { i } else { best })
        }
    };
    // Prim's algorithm from the root; ties broken by lower index.
    let mut in_tree = vec![false; k];
    in_tree[root] = true;
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    for _ in 1..k {
        let mut best: Option<(usize, usize)> = None;
        for p in (0..k).filter(|&p| in_tree[p]) {
            for c in (0..k).filter(|&c| !in_tree[c]) {
                if best.is_none_or(|(bp, bc)| mi[p][c] > mi[bp][bc]) {
                    best = Some((p, c));
                }
            }
        }
        let (p, c) = best.expect("complete graph");
        in_tree[c] = true;
        edges.push((classes[p].clone(), classes[c].clone()));
    }
    Ok(edges)
}

/// Fits priors and pairwise conditionals for an explicit dependency structure.
pub fn fit_structure(
    d: &Dataset,
    classes: &[String],
    edges: &[(String, String)],
    h: &Hyperparams,
) -> Result<Classifier> {
    if d.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    if !(h.alpha >= 0.0 && h.alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("invalid alpha {}", h.alpha)));
    }
    for c in classes {
        d.column_index(c)?;
    }
    let mut variables = Vec::with_capacity(d.columns().len());
    for (j, name) in d.columns().iter().enumerate() {
        if d.kind(j) == ColumnKind::Numeric {
            return Err(Error::InvalidDataset(format!(
                "column `{name}` is numeric; discretize it first"
            )));
        }
        let role = if classes.contains(name) {
            Role::Classification
        } else {
            Role::Observation
        };
        let domain = Domain::new(d.domain(j)).map_err(|_| {
            Error::InvalidDataset(format!("column `{name}` needs at least two distinct values"))
        })?;
        variables.push(Variable {
            name: name.clone(),
            role,
            domain,
        });
    }
    let encoded: Vec<Vec<usize>> = d
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&variables)
                .map(|(cell, v)| v.domain.index_of(cell).expect("domain covers column"))
                .collect()
        })
        .collect();

    let alpha = h.alpha;
    let n = encoded.len() as f64;
    let mut warnings = Vec::new();
    let mut priors = Vec::with_capacity(variables.len());
    for (j, v) in variables.iter().enumerate() {
        if let Some(beta) = h.priors.get(&v.name) {
            if beta.len() != v.domain.len() {
                return Err(Error::InvalidConfig(format!(
                    "priors for `{}` have {} entries, domain has {}",
                    v.name,
                    beta.len(),
                    v.domain.len()
                )));
            }
            priors.push(beta.clone());
            continue;
        }
        let mut counts = vec![0.0; v.domain.len()];
        for row in &encoded {
            counts[row[j]] += 1.0;
        }
        let a = if h.smooth_priors { alpha } else { 0.0 };
        let denom = n + a * v.domain.len() as f64;
        let row: Vec<f64> = counts.iter().map(|c| (c + a) / denom).collect();
        if row.contains(&0.0) {
            warnings.push(format!("prior of `{}` has zero entries", v.name));
        }
        priors.push(row);
    }

    let index = |name: &str| {
        d.column_index(name)
            .map_err(|_| Error::InvalidConfig(format!("structure names unknown column `{name}`")))
    };
    let mut var_edges = Vec::with_capacity(edges.len());
    let mut conditionals = BTreeMap::new();
    for (p, c) in edges {
        let (jp, jc) = (index(p)?, index(c)?);
        let (np, nc) = (variables[jp].domain.len(), variables[jc].domain.len());
        let mut counts = vec![vec![0.0; nc]; np];
        for row in &encoded {
            counts[row[jp]][row[jc]] += 1.0;
        }
        let mut table = Vec::with_capacity(np);
        for (pv, column) in counts.iter().enumerate() {
            let total: f64 = column.iter().sum();
            let denom = total + alpha * nc as f64;
            if denom == 0.0 {
                warnings.push(format!(
                    "P({c} | {p}={}) has no counts; using a uniform column",
                    variables[jp].domain.label(pv)
                ));
                table.push(vec![1.0 / nc as f64; nc]);
                continue;
            }
            let probs: Vec<f64> = column.iter().map(|k| (k + alpha) / denom).collect();
            if probs.contains(&0.0) {
                warnings.push(format!(
                    "P({c} | {p}={}) has zero entries",
                    variables[jp].domain.label(pv)
                ));
            }
            table.push(probs);
        }
        var_edges.push((VarId(jp), VarId(jc)));
        conditionals.insert((VarId(jp), VarId(jc)), table);
    }
    Ok(Classifier::new(variables, var_edges, priors, conditionals)?.with_warnings(warnings))
}

/// Encodes one raw record against a fitted classifier, bucketing numeric cells with
/// the classifier's cut-points. Columns that are not variables are ignored;
/// classification columns are ignored unless `keep_classifications`.
pub fn encode_row(
    c: &Classifier,
    header: &[String],
    row: &[String],
    keep_classifications: bool,
) -> Result<Assignment> {
    let mut a = c.empty_assignment();
    for (name, cell) in header.iter().zip(row) {
        let Ok(var) = c.var(name) else { continue };
        if c.is_classification(var) && !keep_classifications {
            continue;
        }
        let label = match c.cuts().get(name) {
            Some(cuts) => {
                let x: f64 = cell.parse().map_err(|_| Error::ValueOutsideDomain {
                    variable: name.clone(),
                    value: cell.clone(),
                })?;
                bucket_label(bucket(cuts, x))
            }
            None => cell.clone(),
        };
        a.set(var, c.value(var, &label)?);
    }
    for o in c.observations() {
        if !a.is_bound(o) {
            return Err(Error::IncompleteInput(c.name(o).to_string()));
        }
    }
    Ok(a)
}

/// Encodes every row of `d` as an input assignment.
pub fn encode_dataset(c: &Classifier, d: &Dataset) -> Result<Vec<Assignment>> {
    d.rows()
        .iter()
        .map(|r| encode_row(c, d.columns(), r, false))
        .collect()
}
