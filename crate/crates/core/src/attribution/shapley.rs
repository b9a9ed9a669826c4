use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{observations_only, AttributionScores, AttributionSource};
use crate::error::{Error, Result};
use crate::kits::enumeration_size;
use crate::model::{Assignment, Classifier, VarId};

pub const DEFAULT_BUDGET: u128 = 5_000_000;
pub const MAX_OBSERVATIONS: usize = 20;

/// Exact Shapley values of the decided output's posterior.
///
/// The value of a coalition `S` is the posterior of `σ(a, y)` with observations in
/// `S` fixed to the input and the others averaged over their priors.
#[derive(Clone, Debug)]
pub struct Shapley {
    budget: u128,
}

impl Shapley {
    pub fn new(budget: u128) -> Self {
        Shapley { budget }
    }

    /// Posterior evaluations needed: `Π (1 + |V(x)|)` over observations.
    pub fn cost(c: &Classifier) -> u128 {
        let sizes: Vec<usize> = c.observations().iter().map(|&x| c.domain(x).len() + 1).collect();
        enumeration_size(&sizes)
    }

    fn check(&self, c: &Classifier) -> Result<()> {
        let m = c.observations().len();
        if m > MAX_OBSERVATIONS {
            return Err(Error::AttributionUnavailable(format!(
                "exact Shapley values support at most {MAX_OBSERVATIONS} observations, got {m}; use the surrogate"
            )));
        }
        let cost = Self::cost(c);
        if cost > self.budget {
            return Err(Error::AttributionUnavailable(format!(
                "exact Shapley values need {cost} evaluations, budget is {}; use the surrogate",
                self.budget
            )));
        }
        Ok(())
    }

    /// Coalition values `v(S)` for every bitmask `S` over the observations.
    pub fn coalition_values(c: &Classifier, a: &Assignment, y: VarId, target: usize) -> Result<Vec<f64>> {
        let obs = c.observations();
        let m = obs.len();
        let sizes: Vec<usize> = obs.iter().map(|&x| c.domain(x).len()).collect();
        let original: Vec<usize> = obs.iter().map(|&x| a.get(x).expect("input")).collect();

        // Posterior of the target over the full grid, mixed-radix indexed.
        let total: usize = sizes.iter().product();
        let mut grid = Vec::with_capacity(total);
        let mut combo = vec![0usize; m];
        for _ in 0..total {
            let mut input = c.empty_assignment();
            for (&x, &v) in obs.iter().zip(&combo) {
                input.set(x, v);
            }
            grid.push(c.posterior(&input, y)?.prob(target));
            for i in (0..m).rev() {
                combo[i] += 1;
                if combo[i] < sizes[i] {
                    break;
                }
                combo[i] = 0;
            }
        }

        let mut values = vec![0.0; 1 << m];
        for (mask, value) in values.iter_mut().enumerate() {
            let free: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) == 0).collect();
            let mut z = original.clone();
            for &j in &free {
                z[j] = 0;
            }
            let mut acc = 0.0;
            loop {
                let mut weight = 1.0;
                for &j in &free {
                    weight *= c.prior(obs[j])[z[j]];
                }
                let index = z.iter().zip(&sizes).fold(0, |acc, (&v, &s)| acc * s + v);
                acc += weight * grid[index];
                let mut advanced = false;
                for &j in free.iter().rev() {
                    z[j] += 1;
                    if z[j] < sizes[j] {
                        advanced = true;
                        break;
                    }
                    z[j] = 0;
                }
                if !advanced {
                    break;
                }
            }
            *value = acc;
        }
        Ok(values)
    }

    /// Shapley values from coalition values over `m` players.
    pub fn shapley_from_values(values: &[f64], m: usize) -> Vec<f64> {
        let fact: Vec<f64> = (0..=m)
            .scan(1.0, |acc, i| {
                if i > 0 {
                    *acc *= i as f64;
                }
                Some(*acc)
            })
            .collect();
        (0..m)
            .map(|i| {
                let bit = 1 << i;
                (0..values.len())
                    .filter(|mask| mask & bit == 0)
                    .map(|mask| {
                        let s = (mask as u32).count_ones() as usize;
                        let w = fact[s] * fact[m - s - 1] / fact[m];
                        w * (values[mask | bit] - values[mask])
                    })
                    .sum()
            })
            .collect()
    }
}

impl AttributionSource for Shapley {
    fn name(&self) -> &str {
        "shapley"
    }

    fn scores(
        &self,
        c: &Classifier,
        a: &Assignment,
        outputs: &BTreeSet<VarId>,
        _instance: &str,
    ) -> Result<AttributionScores> {
        self.check(c)?;
        let input = observations_only(c, a)?;
        let decided = c.predict_all(&input)?;
        let m = c.observations().len();
        let outs: Vec<VarId> = outputs.iter().copied().collect();
        let per_output = outs
            .par_iter()
            .map(|&y| {
                let values =
                    Self::coalition_values(c, &input, y, decided.get(y).expect("decided"))?;
                Ok(Self::shapley_from_values(&values, m))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut scores = AttributionScores::new();
        for (&y, phi) in outs.iter().zip(per_output) {
            for (&x, v) in c.observations().iter().zip(phi) {
                scores.insert(x, y, v);
            }
        }
        Ok(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_player_formula() {
        // v(∅)=0, v({0})=1, v({1})=2, v({0,1})=5
        let phi = Shapley::shapley_from_values(&[0.0, 1.0, 2.0, 5.0], 2);
        assert!((phi[0] - 0.5 * (1.0 + 3.0)).abs() < 1e-12);
        assert!((phi[1] - 0.5 * (2.0 + 4.0)).abs() < 1e-12);
    }
}
