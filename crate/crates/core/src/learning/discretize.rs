use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{ColumnKind, Dataset};
use crate::error::{Error, Result};

/// How a numeric column is bucketed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum BinSpec {
    /// Same size: cut-points at empirical quantiles.
    Ss { count: usize },
    /// Same length: equal-width buckets between min and max.
    Sl { count: usize },
    Custom { cuts: Vec<f64> },
}

/// Bucket label for index `i`.
pub fn bucket_label(i: usize) -> String {
    format!("b{i}")
}

/// Bucket of `x`: the number of cut-points strictly below it (buckets are right-closed).
pub fn bucket(cuts: &[f64], x: f64) -> usize {
    cuts.partition_point(|&c| c < x)
}

/// Linear-interpolation quantile of a sorted, non-empty slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Cut-points for `values` under `spec`.
pub fn cut_points(column: &str, values: &[f64], spec: &BinSpec) -> Result<Vec<f64>> {
    let invalid = |msg: String| Error::InvalidConfig(format!("bins for `{column}`: {msg}"));
    if values.is_empty() {
        return Err(invalid("column is empty".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match spec {
        BinSpec::Sl { count } | BinSpec::Ss { count } if *count < 2 => {
            Err(invalid(format!("need at least 2 buckets, got {count}")))
        }
        BinSpec::Sl { count } => {
            if min == max {
                return Err(invalid("constant column yields a single bucket".into()));
            }
            let width = (max - min) / *count as f64;
            Ok((1..*count).map(|k| min + k as f64 * width).collect())
        }
        BinSpec::Ss { count } => {
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mut cuts: Vec<f64> = (1..*count)
                .map(|k| quantile(&sorted, k as f64 / *count as f64))
                .filter(|&c| c < max)
                .collect();
            cuts.dedup();
            if cuts.is_empty() {
                return Err(invalid("quantiles collapse into a single bucket".into()));
            }
            Ok(cuts)
        }
        BinSpec::Custom { cuts } => {
            if cuts.is_empty() {
                return Err(invalid("custom cut-points are empty".into()));
            }
            if cuts.iter().any(|c| !c.is_finite()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(format!(
                    "custom cut-points must be finite and strictly increasing: {cuts:?}"
                )));
            }
            Ok(cuts.clone())
        }
    }
}

/// Replaces every numeric column by bucket labels `b0..`; returns the cut-points used.
///
/// Numeric columns without a spec are an error; categorical columns are untouched.
pub fn discretize(
    d: &Dataset,
    specs: &BTreeMap<String, BinSpec>,
) -> Result<(Dataset, BTreeMap<String, Vec<f64>>)> {
    for name in specs.keys() {
        d.column_index(name)
            .map_err(|_| Error::InvalidConfig(format!("bins declared for unknown column `{name}`")))?;
    }
    let mut out = d.clone();
    let mut all_cuts = BTreeMap::new();
    for (j, name) in d.columns().iter().enumerate() {
        let spec = specs.get(name);
        if d.kind(j) == ColumnKind::Categorical {
            if spec.is_some() {
                return Err(Error::InvalidConfig(format!(
                    "bins declared for categorical column `{name}`"
                )));
            }
            continue;
        }
        let spec = spec.ok_or_else(|| {
            Error::InvalidConfig(format!(
                "numeric column `{name}` needs `bins.{name}` or a declared domain"
            ))
        })?;
        let values: Vec<f64> = d
            .column(j)
            .map(|v| v.parse().expect("numeric column"))
            .collect();
        let cuts = cut_points(name, &values, spec)?;
        let labels = values.iter().map(|&x| bucket_label(bucket(&cuts, x))).collect();
        let domain = (0..=cuts.len()).map(bucket_label).collect();
        out.replace_column(j, labels, domain);
        all_cuts.insert(name.clone(), cuts);
    }
    Ok((out, all_cuts))
}
