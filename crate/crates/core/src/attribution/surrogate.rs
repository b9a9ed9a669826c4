use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{observations_only, AttributionParams, AttributionScores, AttributionSource};
use crate::error::{Error, Result};
use crate::model::{Assignment, Classifier, VarId};

pub const MIN_SAMPLES: usize = 100;
const RIDGE: f64 = 1e-6;
const RESAMPLE_PROBABILITY: f64 = 0.5;

/// Local linear surrogate fitted on perturbations of the input.
///
/// Each observation is independently resampled from its prior with probability
/// one half. Features are binary "unchanged" indicators, the target is the
/// posterior of the decided output value, and samples are weighted by
/// `exp(-d^2 / w^2)` on the number `d` of changed observations. The score of an
/// observation is its weighted least squares coefficient.
#[derive(Clone, Debug)]
pub struct Surrogate {
    samples: usize,
    seed: u64,
    kernel_width: Option<f64>,
}

impl Surrogate {
    pub fn new(params: &AttributionParams) -> Result<Self> {
        if params.samples < MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "the surrogate needs at least {MIN_SAMPLES} samples, got {}",
                params.samples
            )));
        }
        if let Some(w) = params.kernel_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidConfig(format!("invalid kernel width {w}")));
            }
        }
        Ok(Surrogate {
            samples: params.samples,
            seed: params.seed,
            kernel_width: params.kernel_width,
        })
    }

    fn output_scores(
        &self,
        c: &Classifier,
        a: &Assignment,
        y: VarId,
        target: usize,
    ) -> Result<(Vec<f64>, Option<String>)> {
        let obs = c.observations();
        let m = obs.len();
        let width = self
            .kernel_width
            .unwrap_or_else(|| 0.75 * (m as f64).sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(y.0 as u64);
        let priors = obs
            .iter()
            .map(|&x| {
                WeightedIndex::new(c.prior(x)).map_err(|e| {
                    Error::InvalidClassifier(format!("prior of `{}`: {e}", c.name(x)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let original: Vec<usize> = obs.iter().map(|&x| a.get(x).expect("input")).collect();

        let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
        let mut features = Vec::with_capacity(self.samples);
        let mut targets = Vec::with_capacity(self.samples);
        let mut weights = Vec::with_capacity(self.samples);
        for s in 0..self.samples {
            let mut values = original.clone();
            if s > 0 {
                for (j, dist) in priors.iter().enumerate() {
                    if rng.random_bool(RESAMPLE_PROBABILITY) {
                        values[j] = dist.sample(&mut rng);
                    }
                }
            }
            let unchanged: Vec<bool> = values.iter().zip(&original).map(|(v, o)| v == o).collect();
            let d = unchanged.iter().filter(|u| !**u).count() as f64;
            let p = match cache.get(&values) {
                Some(&p) => p,
                None => {
                    let mut input = c.empty_assignment();
                    for (&x, &v) in obs.iter().zip(&values) {
                        input.set(x, v);
                    }
                    let p = c.posterior(&input, y)?.prob(target);
                    cache.insert(values, p);
                    p
                }
            };
            features.push(unchanged);
            targets.push(p);
            weights.push((-(d * d) / (width * width)).exp());
        }

        // Indicators that never vary carry no information; they score zero.
        let varying: Vec<usize> = (0..m)
            .filter(|&j| features.iter().any(|f| !f[j]) && features.iter().any(|f| f[j]))
            .collect();
        let k = varying.len() + 1;
        let mut xtwx = DMatrix::<f64>::zeros(k, k);
        let mut xtwy = DVector::<f64>::zeros(k);
        let mut row = vec![0.0; k];
        for ((f, &t), &w) in features.iter().zip(&targets).zip(&weights) {
            row[0] = 1.0;
            for (i, &j) in varying.iter().enumerate() {
                row[i + 1] = if f[j] { 1.0 } else { 0.0 };
            }
            for r in 0..k {
                xtwy[r] += w * row[r] * t;
                for q in 0..k {
                    xtwx[(r, q)] += w * row[r] * row[q];
                }
            }
        }
        let mut note = None;
        let beta = match xtwx.clone().cholesky() {
            Some(ch) => ch.solve(&xtwy),
            None => {
                note = Some(format!(
                    "surrogate normal equations for `{}` are singular; ridge {RIDGE} applied",
                    c.name(y)
                ));
                let ridged = xtwx + DMatrix::<f64>::identity(k, k) * RIDGE;
                ridged
                    .cholesky()
                    .ok_or_else(|| {
                        Error::AttributionUnavailable(format!(
                            "surrogate regression for `{}` failed",
                            c.name(y)
                        ))
                    })?
                    .solve(&xtwy)
            }
        };
        let mut scores = vec![0.0; m];
        for (i, &j) in varying.iter().enumerate() {
            scores[j] = beta[i + 1];
        }
        Ok((scores, note))
    }
}

impl AttributionSource for Surrogate {
    fn name(&self) -> &str {
        "surrogate"
    }

    fn scores(
        &self,
        c: &Classifier,
        a: &Assignment,
        outputs: &BTreeSet<VarId>,
        _instance: &str,
    ) -> Result<AttributionScores> {
        let input = observations_only(c, a)?;
        let decided = c.predict_all(&input)?;
        let outs: Vec<VarId> = outputs.iter().copied().collect();
        let per_output = outs
            .par_iter()
            .map(|&y| self.output_scores(c, &input, y, decided.get(y).expect("decided")))
            .collect::<Result<Vec<_>>>()?;
        let mut scores = AttributionScores::new();
        for (&y, (values, note)) in outs.iter().zip(per_output) {
            for (&x, v) in c.observations().iter().zip(values) {
                scores.insert(x, y, v);
            }
            if let Some(n) = note {
                scores.notes.push(n);
            }
        }
        Ok(scores)
    }
}
