use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::attribution::{AttributionScores, AttributionSource};
use crate::error::{Error, Result};
use crate::influence::InfluenceGraph;
use crate::model::{Assignment, Classifier, VarId};

/// Default cap on the number of combinations a counterfactual table may enumerate.
pub const DEFAULT_CF_BUDGET: u128 = 1_000_000;

#[derive(Clone, Debug)]
pub struct EvaluatorOptions {
    pub budget: u128,
    pub attribution: Option<Arc<dyn AttributionSource>>,
    /// Instance identifier handed to attribution sources (used by score files).
    pub instance: String,
}

impl Default for EvaluatorOptions {
    fn default() -> Self {
        EvaluatorOptions {
            budget: DEFAULT_CF_BUDGET,
            attribution: None,
            instance: "0".to_string(),
        }
    }
}

/// Decisions of `y` and of its influencers over an enumerated set of inputs.
#[derive(Clone, Debug)]
pub struct CfTable {
    /// Influencers of `y`, in graph order.
    pub influencers: Vec<VarId>,
    /// `(influencer values, decided value of y)` per enumerated combination.
    pub rows: Vec<(Vec<usize>, usize)>,
}

type LocalKey = (VarId, Option<(VarId, usize)>);

/// Everything relation properties need about one input: the classifier, the
/// influence graph, the input, the decided values, and shared caches.
///
/// Counts one baseline prediction plus one posterior evaluation per distinct
/// modified input, and the number of counterfactual combinations enumerated.
pub struct Evaluator<'a> {
    classifier: &'a Classifier,
    graph: &'a InfluenceGraph,
    input: Assignment,
    decided: Assignment,
    options: EvaluatorOptions,
    evaluations: AtomicUsize,
    enumerated: AtomicU64,
    local: Mutex<HashMap<LocalKey, Arc<Vec<f64>>>>,
    tables: Mutex<HashMap<(VarId, bool), Arc<CfTable>>>,
    scores: Mutex<Option<Arc<AttributionScores>>>,
    diagnostics: Mutex<Vec<String>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        classifier: &'a Classifier,
        graph: &'a InfluenceGraph,
        input: &Assignment,
        options: EvaluatorOptions,
    ) -> Result<Self> {
        let mut input = input.clone();
        for x in classifier.classifications() {
            input.unset(x);
        }
        let decided = classifier.predict_all(&input)?;
        Ok(Evaluator {
            classifier,
            graph,
            input,
            decided,
            options,
            evaluations: AtomicUsize::new(1),
            enumerated: AtomicU64::new(0),
            local: Mutex::new(HashMap::new()),
            tables: Mutex::new(HashMap::new()),
            scores: Mutex::new(None),
            diagnostics: Mutex::new(Vec::new()),
        })
    }

    pub fn classifier(&self) -> &'a Classifier {
        self.classifier
    }

    pub fn graph(&self) -> &'a InfluenceGraph {
        self.graph
    }

    /// The input assignment (observations only).
    pub fn input(&self) -> &Assignment {
        &self.input
    }

    /// The input extended with every decided classification.
    pub fn decided(&self) -> &Assignment {
        &self.decided
    }

    /// `σ(a, v)`.
    pub fn value(&self, v: VarId) -> usize {
        self.decided.get(v).expect("every variable is decided")
    }

    pub fn options(&self) -> &EvaluatorOptions {
        &self.options
    }

    /// Values of `x` other than its decided one.
    pub fn alternatives(&self, x: VarId) -> impl Iterator<Item = usize> {
        let cur = self.value(x);
        (0..self.classifier.domain(x).len()).filter(move |&k| k != cur)
    }

    /// Posterior of `y` from its own naive Bayes model, with every influencer at its
    /// decided value except for the optional `change`.
    pub fn local_posterior(&self, y: VarId, change: Option<(VarId, usize)>) -> Result<Arc<Vec<f64>>> {
        let key = (y, change);
        if let Some(p) = self.local.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(p));
        }
        let mut values = self.decided.raw().to_vec();
        if let Some((x, k)) = change {
            values[x.0] = Some(k);
        }
        let probs = Arc::new(self.classifier.nbc_posterior(y, &values)?);
        let mut cache = self.local.lock().expect("cache lock");
        let entry = cache.entry(key).or_insert_with(|| {
            if change.is_some() {
                self.evaluations.fetch_add(1, Ordering::Relaxed);
            }
            probs
        });
        Ok(Arc::clone(entry))
    }

    /// `P(σ(a, y) | a)`.
    pub fn current_probability(&self, y: VarId) -> Result<f64> {
        Ok(self.local_posterior(y, None)?[self.value(y)])
    }

    /// `P(σ(a, y) | a'_{x_k})` for every alternative `x_k`, in domain order.
    pub fn modified_probabilities(&self, x: VarId, y: VarId) -> Result<Vec<(usize, f64)>> {
        let target = self.value(y);
        self.alternatives(x)
            .map(|k| Ok((k, self.local_posterior(y, Some((x, k)))?[target])))
            .collect()
    }

    /// Decision table of `y` over combinations of inputs.
    ///
    /// With `observation_level`, every joint value of the observations upstream of
    /// `y` is enumerated and all classifications are re-decided. Otherwise the
    /// influencers of `y` are enumerated directly and clamped.
    pub fn cf_table(&self, y: VarId, observation_level: bool) -> Result<Arc<CfTable>> {
        if let Some(t) = self.tables.lock().expect("cache lock").get(&(y, observation_level)) {
            return Ok(Arc::clone(t));
        }
        let c = self.classifier;
        let influencers = self.graph.parents(y).to_vec();
        let varying: Vec<VarId> = if observation_level {
            self.upstream_observations(y)
        } else {
            influencers.clone()
        };
        let sizes: Vec<usize> = varying.iter().map(|&v| c.domain(v).len()).collect();
        let needed = enumeration_size(&sizes);
        if needed > self.options.budget {
            return Err(Error::BudgetExceeded {
                needed,
                budget: self.options.budget,
            });
        }
        let mut rows = Vec::with_capacity(needed as usize);
        let mut combo = vec![0usize; varying.len()];
        loop {
            let row = if observation_level {
                let mut a = self.input.clone();
                for (&v, &k) in varying.iter().zip(&combo) {
                    a.set(v, k);
                }
                let full = c.predict_all(&a)?;
                let values = influencers.iter().map(|&u| full.get(u).expect("decided")).collect();
                (values, full.get(y).expect("decided"))
            } else {
                let mut values = self.decided.raw().to_vec();
                for (&v, &k) in varying.iter().zip(&combo) {
                    values[v.0] = Some(k);
                }
                let decision = crate::model::argmax(&c.nbc_posterior(y, &values)?);
                (combo.clone(), decision)
            };
            rows.push(row);
            if !advance(&mut combo, &sizes) {
                break;
            }
        }
        self.enumerated.fetch_add(needed as u64, Ordering::Relaxed);
        let table = Arc::new(CfTable { influencers, rows });
        self.tables
            .lock()
            .expect("cache lock")
            .insert((y, observation_level), Arc::clone(&table));
        Ok(table)
    }

    /// Observations from which influence flows, directly or not, into `y`.
    pub fn upstream_observations(&self, y: VarId) -> Vec<VarId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![y];
        while let Some(v) = stack.pop() {
            for &u in self.graph.parents(v) {
                if seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        seen.into_iter()
            .filter(|&v| !self.classifier.is_classification(v))
            .collect()
    }

    /// Attribution score of the influence `(x, y)` from the configured source.
    pub fn attribution_score(&self, x: VarId, y: VarId) -> Result<f64> {
        let scores = {
            let mut slot = self.scores.lock().expect("cache lock");
            match &*slot {
                Some(s) => Arc::clone(s),
                None => {
                    let source = self.options.attribution.as_ref().ok_or_else(|| {
                        Error::AttributionUnavailable("no attribution source configured".into())
                    })?;
                    let outputs = if self.graph.outputs().is_empty() {
                        self.classifier.classifications().into_iter().collect()
                    } else {
                        self.graph.outputs().clone()
                    };
                    let s = Arc::new(source.scores(
                        self.classifier,
                        &self.input,
                        &outputs,
                        &self.options.instance,
                    )?);
                    *slot = Some(Arc::clone(&s));
                    s
                }
            }
        };
        scores.require(self.classifier, x, y)
    }

    /// Posterior evaluations so far: one for the baseline prediction plus one per
    /// distinct modified input.
    pub fn posterior_evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Counterfactual combinations enumerated so far.
    pub fn enumerated(&self) -> u64 {
        self.enumerated.load(Ordering::Relaxed)
    }

    pub fn note(&self, message: String) {
        let mut d = self.diagnostics.lock().expect("diagnostics lock");
        if !d.contains(&message) {
            d.push(message);
        }
    }

    pub fn diagnostics(&self) -> Vec<String> {
        self.diagnostics.lock().expect("diagnostics lock").clone()
    }
}

/// `Π sizes`, saturating.
pub fn enumeration_size(sizes: &[usize]) -> u128 {
    sizes
        .iter()
        .fold(1u128, |acc, &s| acc.saturating_mul(s as u128))
}

/// Odometer increment; returns false after the last combination.
fn advance(combo: &mut [usize], sizes: &[usize]) -> bool {
    for i in (0..combo.len()).rev() {
        combo[i] += 1;
        if combo[i] < sizes[i] {
            return true;
        }
        combo[i] = 0;
    }
    false
}
