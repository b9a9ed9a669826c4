//! Input-output attribution scores: a perturbation surrogate, exact Shapley values,
//! and scores imported from files.

mod file;
mod shapley;
mod surrogate;

pub use file::{
    load_scores, parse_scores_csv, records, write_scores_csv, write_scores_json, ScoreFile,
    ScoreRecord,
};
pub use shapley::Shapley;
pub use surrogate::Surrogate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Assignment, Classifier, VarId};

/// Scores `v(a, x, y)` for one input, keyed by `(observation, output)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttributionScores {
    scores: BTreeMap<(VarId, VarId), f64>,
    /// Diagnostics raised while computing the scores.
    pub notes: Vec<String>,
}

impl AttributionScores {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: VarId, y: VarId, score: f64) {
        self.scores.insert((x, y), score);
    }

    pub fn get(&self, x: VarId, y: VarId) -> Option<f64> {
        self.scores.get(&(x, y)).copied()
    }

    /// Like [`get`](Self::get), with an error naming the missing pair.
    pub fn require(&self, c: &Classifier, x: VarId, y: VarId) -> Result<f64> {
        self.get(x, y).ok_or_else(|| {
            Error::AttributionUnavailable(format!(
                "no score for observation `{}` and output `{}`",
                c.name(x),
                c.name(y)
            ))
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = ((VarId, VarId), f64)> + '_ {
        self.scores.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Produces attribution scores for every `(observation, output)` pair.
pub trait AttributionSource: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn scores(
        &self,
        c: &Classifier,
        a: &Assignment,
        outputs: &BTreeSet<VarId>,
        instance: &str,
    ) -> Result<AttributionScores>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributionParams {
    /// Perturbations drawn by the surrogate.
    pub samples: usize,
    pub seed: u64,
    /// Surrogate kernel width; defaults to `0.75 * sqrt(|observations|)`.
    pub kernel_width: Option<f64>,
    /// Cap on posterior evaluations for exact Shapley values.
    pub shapley_budget: u128,
}

impl Default for AttributionParams {
    fn default() -> Self {
        AttributionParams {
            samples: 5000,
            seed: 0,
            kernel_width: None,
            shapley_budget: shapley::DEFAULT_BUDGET,
        }
    }
}

type Factory = fn(&AttributionParams) -> Result<Arc<dyn AttributionSource>>;

/// Attribution sources by name.
#[derive(Clone, Debug, Default)]
pub struct AttributionRegistry {
    factories: BTreeMap<String, Factory>,
}

impl AttributionRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `surrogate` (alias `lime`) and `shapley` (alias `shap`).
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        let surrogate: Factory = |p| Ok(Arc::new(Surrogate::new(p)?));
        let shapley: Factory = |p| Ok(Arc::new(Shapley::new(p.shapley_budget)));
        for (name, f) in [
            ("surrogate", surrogate),
            ("lime", surrogate),
            ("shapley", shapley),
            ("shap", shapley),
        ] {
            r.register(name, f).expect("unique builtin names");
        }
        r
    }

    pub fn register(&mut self, name: &str, factory: Factory) -> Result<()> {
        if self.factories.contains_key(name) {
            return Err(Error::InvalidConfig(format!(
                "attribution source `{name}` is already registered"
            )));
        }
        self.factories.insert(name.to_string(), factory);
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    /// Resolves a registered name, or `file:<path>` to a score file.
    pub fn source(&self, name: &str, params: &AttributionParams) -> Result<Arc<dyn AttributionSource>> {
        if let Some(path) = name.strip_prefix("file:") {
            return Ok(Arc::new(ScoreFile::load(path)?));
        }
        let f = self.factories.get(name).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown attribution source `{name}` (known: {}, or file:<path>)",
                self.names().join(", ")
            ))
        })?;
        f(params)
    }
}

/// Observations of `a` as an input assignment with classifications unbound.
pub(crate) fn observations_only(c: &Classifier, a: &Assignment) -> Result<Assignment> {
    let mut out = c.empty_assignment();
    for x in c.observations() {
        let v = a
            .get(x)
            .ok_or_else(|| Error::IncompleteInput(c.name(x).to_string()))?;
        out.set(x, v);
    }
    Ok(out)
}
