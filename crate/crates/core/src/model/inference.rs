use serde::{Deserialize, Serialize};

use super::{Assignment, Classifier, VarId};
use crate::error::{Error, Result};

/// Above this many multiplicative factors scores are accumulated in log space.
const LOG_SPACE_FACTORS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDistribution {
    pub variable: VarId,
    pub probs: Vec<f64>,
}

impl PosteriorDistribution {
    fn point_mass(variable: VarId, len: usize, value: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[value] = 1.0;
        PosteriorDistribution { variable, probs }
    }

    /// Index of the first maximal probability, in domain order.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }

    pub fn prob(&self, value: usize) -> f64 {
        self.probs[value]
    }
}

pub(crate) fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

impl Classifier {
    /// Posterior distribution of `x` given the input `a`.
    ///
    /// Bound variables get a point mass. Otherwise `x` is scored by the naive Bayes
    /// classifier over its children, with unbound child classifications clamped to
    /// their own decided values.
    pub fn posterior(&self, a: &Assignment, x: VarId) -> Result<PosteriorDistribution> {
        self.check_input(a)?;
        self.check_var(x)?;
        let mut memo = a.clone();
        self.posterior_memo(&mut memo, x)
    }

    /// `argmax` of the posterior, ties broken by domain order.
    pub fn decide(&self, a: &Assignment, x: VarId) -> Result<usize> {
        Ok(self.posterior(a, x)?.argmax())
    }

    /// Extends `a` with the decided value of every classification.
    pub fn predict_all(&self, a: &Assignment) -> Result<Assignment> {
        self.check_input(a)?;
        let mut memo = a.clone();
        for &x in self.topological_order().iter().rev() {
            if self.is_classification(x) && !memo.is_bound(x) {
                let v = self.posterior_memo(&mut memo, x)?.argmax();
                memo.set(x, v);
            }
        }
        Ok(memo)
    }

    /// Copy of `a` with `x` clamped to `value`.
    pub fn modified_input(&self, a: &Assignment, x: VarId, value: usize) -> Result<Assignment> {
        self.check_var(x)?;
        if value >= self.domain(x).len() {
            return Err(Error::ValueOutsideDomain {
                variable: self.name(x).to_string(),
                value: value.to_string(),
            });
        }
        let mut out = a.clone();
        out.set(x, value);
        Ok(out)
    }

    fn posterior_memo(&self, memo: &mut Assignment, x: VarId) -> Result<PosteriorDistribution> {
        let len = self.domain(x).len();
        if let Some(v) = memo.get(x) {
            return Ok(PosteriorDistribution::point_mass(x, len, v));
        }
        for &u in self.children(x) {
            if !memo.is_bound(u) {
                let v = self.posterior_memo(memo, u)?.argmax();
                memo.set(u, v);
            }
        }
        let probs = self.nbc_posterior(x, memo.raw())?;
        Ok(PosteriorDistribution { variable: x, probs })
    }

    /// Naive Bayes posterior of `x` from the values of its children in `values`.
    ///
    /// Every child of `x` must be bound in `values`.
    pub(crate) fn nbc_posterior(&self, x: VarId, values: &[Option<usize>]) -> Result<Vec<f64>> {
        let children = self.children(x);
        let prior = self.prior(x);
        let len = prior.len();
        let mut child_values = Vec::with_capacity(children.len());
        for &u in children {
            let v = values[u.0].ok_or_else(|| Error::IncompleteInput(self.name(u).to_string()))?;
            child_values.push((self.conditional(x, u).expect("edge has a table"), v));
        }

        let probs = if children.len() + 1 > LOG_SPACE_FACTORS {
            let logs: Vec<f64> = (0..len)
                .map(|i| {
                    prior[i].ln()
                        + child_values
                            .iter()
                            .map(|(table, v)| table[i][*v].ln())
                            .sum::<f64>()
                })
                .collect();
            let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return Err(Error::DegenerateDistribution(self.name(x).to_string()));
            }
            logs.iter().map(|l| (l - max).exp()).collect::<Vec<_>>()
        } else {
            (0..len)
                .map(|i| {
                    child_values
                        .iter()
                        .fold(prior[i], |acc, (table, v)| acc * table[i][*v])
                })
                .collect::<Vec<_>>()
        };
        let total: f64 = probs.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::DegenerateDistribution(self.name(x).to_string()));
        }
        Ok(probs.into_iter().map(|p| p / total).collect())
    }

    fn check_var(&self, x: VarId) -> Result<()> {
        if x.0 >= self.len() {
            return Err(Error::UnknownVariable(x.to_string()));
        }
        Ok(())
    }

    fn check_input(&self, a: &Assignment) -> Result<()> {
        if a.len() != self.len() {
            return Err(Error::InvalidConfig(format!(
                "assignment sized for {} variables, classifier has {}",
                a.len(),
                self.len()
            )));
        }
        for (i, v) in a.raw().iter().enumerate() {
            let var = &self.variables()[i];
            match v {
                Some(v) if *v >= var.domain.len() => {
                    return Err(Error::ValueOutsideDomain {
                        variable: var.name.clone(),
                        value: v.to_string(),
                    })
                }
                None if var.role == super::Role::Observation => {
                    return Err(Error::IncompleteInput(var.name.clone()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
