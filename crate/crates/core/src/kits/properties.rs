//! Built-in relation properties.

use super::{CfTable, Evaluator, RelationProperty};
use crate::error::Result;
use crate::influence::GraphKind;
use crate::model::VarId;

/// Every alternative value of `x` strictly raises `P(σ(a, y))`.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicAttack;

/// Every alternative value of `x` strictly lowers `P(σ(a, y))`.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicSupport;

/// The prior-weighted mean over alternative values of `x` is strictly above the
/// current `P(σ(a, y))`.
#[derive(Debug, Clone, Copy)]
pub struct StochasticAttack;

/// The prior-weighted mean over alternative values of `x` is strictly below the
/// current `P(σ(a, y))`.
#[derive(Debug, Clone, Copy)]
pub struct StochasticSupport;

/// Counterfactual: changing `x` alone (other influencers of `y` unchanged) is
/// possible and always flips `y`.
#[derive(Debug, Clone, Copy)]
pub struct Critical {
    /// Enumerate inputs and re-decide classifications, rather than clamping the
    /// influencers of `y`.
    pub observation_level: bool,
}

/// Counterfactual: not critical, but some setting of the other influencers keeps
/// `y` under the current `x` and flips it under another value.
#[derive(Debug, Clone, Copy)]
pub struct Potential {
    pub observation_level: bool,
}

/// Negative attribution score.
#[derive(Debug, Clone, Copy)]
pub struct AttributionAttack;

/// Positive attribution score.
#[derive(Debug, Clone, Copy)]
pub struct AttributionSupport;

fn monotonic(ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<(bool, bool)> {
    let cur = ev.current_probability(y)?;
    let alts = ev.modified_probabilities(x, y)?;
    Ok((
        alts.iter().all(|&(_, p)| cur < p),
        alts.iter().all(|&(_, p)| cur > p),
    ))
}

fn stochastic(ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<(bool, bool)> {
    let c = ev.classifier();
    let cur = ev.current_probability(y)?;
    let prior = c.prior(x);
    let mut weight = 0.0;
    let mut total = 0.0;
    for (k, p) in ev.modified_probabilities(x, y)? {
        weight += prior[k];
        total += prior[k] * p;
    }
    if weight == 0.0 {
        ev.note(format!(
            "alternative values of `{}` have zero prior mass; no stochastic relation to `{}`",
            c.name(x),
            c.name(y)
        ));
        return Ok((false, false));
    }
    let mean = total / weight;
    Ok((cur < mean, cur > mean))
}

/// `(critical, potential)` from a decision table.
pub(crate) fn counterfactual(table: &CfTable, ev: &Evaluator<'_>, x: VarId, y: VarId) -> (bool, bool) {
    let pos = table
        .influencers
        .iter()
        .position(|&u| u == x)
        .expect("x influences y");
    let cur_x = ev.value(x);
    let cur_y = ev.value(y);
    let current: Vec<usize> = table.influencers.iter().map(|&u| ev.value(u)).collect();
    let others_equal = |a: &[usize], b: &[usize]| {
        a.iter()
            .zip(b)
            .enumerate()
            .all(|(i, (p, q))| i == pos || p == q)
    };

    let mut feasible = false;
    let mut always_flips = true;
    for (values, decision) in &table.rows {
        if values[pos] != cur_x && others_equal(values, &current) {
            feasible = true;
            always_flips &= *decision != cur_y;
        }
    }
    let critical = feasible && always_flips;
    if critical {
        return (true, false);
    }
    let keeps: Vec<&Vec<usize>> = table
        .rows
        .iter()
        .filter(|(v, d)| v[pos] == cur_x && *d == cur_y)
        .map(|(v, _)| v)
        .collect();
    let potential = table
        .rows
        .iter()
        .filter(|(v, d)| v[pos] != cur_x && *d != cur_y)
        .any(|(v, _)| keeps.iter().any(|k| others_equal(k, v)));
    (false, potential)
}

impl RelationProperty for MonotonicAttack {
    fn name(&self) -> &str {
        "md-attack"
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Full
    }
    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool> {
        Ok(monotonic(ev, x, y)?.0)
    }
}

impl RelationProperty for MonotonicSupport {
    fn name(&self) -> &str {
        "md-support"
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Full
    }
    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool> {
        Ok(monotonic(ev, x, y)?.1)
    }
}

impl RelationProperty for StochasticAttack {
    fn name(&self) -> &str {
        "sd-attack"
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Full
    }
    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool> {
        Ok(stochastic(ev, x, y)?.0)
    }
}

impl RelationProperty for StochasticSupport {
    fn name(&self) -> &str {
        "sd-support"
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Full
    }
    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool> {
        Ok(stochastic(ev, x, y)?.1)
    }
}

impl RelationProperty for Critical {
    fn name(&self) -> &str {
        if self.observation_level {
            "cf-critical"
        } else {
            "cf-local-critical"
        }
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Full
    }
    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool> {
        let table = ev.cf_table(y, self.observation_level)?;
        Ok(counterfactual(&table, ev, x, y).0)
    }
}

impl RelationProperty for Potential {
    fn name(&self) -> &str {
        if self.observation_level {
            "cf-potential"
        } else {
            "cf-local-potential"
        }
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Full
    }
    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool> {
        let table = ev.cf_table(y, self.observation_level)?;
        Ok(counterfactual(&table, ev, x, y).1)
    }
}

impl RelationProperty for AttributionAttack {
    fn name(&self) -> &str {
        "attr-attack"
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Io
    }
    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool> {
        Ok(ev.attribution_score(x, y)? < 0.0)
    }
}

impl RelationProperty for AttributionSupport {
    fn name(&self) -> &str {
        "attr-support"
    }
    fn graph_kind(&self) -> GraphKind {
        GraphKind::Io
    }
    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool> {
        Ok(ev.attribution_score(x, y)? > 0.0)
    }
}
