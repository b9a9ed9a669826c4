//! Evaluation harness: relation prevalence, agreement between kits, dialectical
//! monotonicity violations, complexity probes and the proposition suite.

mod props;
mod random;
mod report;

pub use props::{
    check_propositions, Counterexample, PropositionReport, PropositionResult, BINARY_MD_EQUALS_SD,
    COINCIDENCE, CRITICAL_WITHIN_SUPPORT, MD_WITHIN_SD,
};
pub use random::{inputs, random_classifier, seeded_classifier, RandomSpec};
pub use report::Report;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::attribution::{AttributionParams, AttributionRegistry, AttributionSource};
use crate::error::{Error, Result};
use crate::idx;
use crate::influence::{influences, io_influences, resolve_outputs, GraphKind, InfluenceGraph};
use crate::kits::{Evaluator, EvaluatorOptions, ExplanationKit, Polarity, DEFAULT_CF_BUDGET};
use crate::model::{Assignment, Classifier, VarId};

/// One edge set per relation type of a kit.
pub type RelationSets = Vec<BTreeSet<(VarId, VarId)>>;

/// Knobs shared by every report.
#[derive(Clone, Debug)]
pub struct EvalSettings {
    /// Outputs of input-output graphs; empty means every classification.
    pub outputs: Vec<String>,
    pub budget: u128,
    /// Attribution source overriding the kit's default.
    pub attribution: Option<String>,
    pub params: AttributionParams,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            outputs: Vec::new(),
            budget: DEFAULT_CF_BUDGET,
            attribution: None,
            params: AttributionParams::default(),
        }
    }
}

/// A kit bound to a classifier, its influence graph and attribution source.
#[derive(Debug)]
pub struct Harness<'a> {
    classifier: &'a Classifier,
    kit: &'a ExplanationKit,
    graph: InfluenceGraph,
    outputs: BTreeSet<VarId>,
    source: Option<Arc<dyn AttributionSource>>,
    budget: u128,
}

impl<'a> Harness<'a> {
    pub fn new(c: &'a Classifier, kit: &'a ExplanationKit, settings: &EvalSettings) -> Result<Self> {
        let outputs = resolve_outputs(c, &settings.outputs)?;
        let (graph, source) = match kit.graph_kind() {
            GraphKind::Full => (influences(c), None),
            GraphKind::Io => {
                let name = settings
                    .attribution
                    .as_deref()
                    .or(kit.default_attribution())
                    .ok_or_else(|| {
                        Error::AttributionUnavailable(format!(
                            "kit `{}` needs an attribution source",
                            kit.name()
                        ))
                    })?;
                let source = AttributionRegistry::builtin().source(name, &settings.params)?;
                (io_influences(c, &outputs)?, Some(source))
            }
        };
        Ok(Harness {
            classifier: c,
            kit,
            graph,
            outputs,
            source,
            budget: settings.budget,
        })
    }

    pub fn classifier(&self) -> &'a Classifier {
        self.classifier
    }

    pub fn kit(&self) -> &'a ExplanationKit {
        self.kit
    }

    pub fn graph(&self) -> &InfluenceGraph {
        &self.graph
    }

    pub fn outputs(&self) -> &BTreeSet<VarId> {
        &self.outputs
    }

    /// Evaluator for the `instance`-th input.
    pub fn evaluator(&self, a: &Assignment, instance: usize) -> Result<Evaluator<'_>> {
        Evaluator::new(
            self.classifier,
            &self.graph,
            a,
            EvaluatorOptions {
                budget: self.budget,
                attribution: self.source.clone(),
                instance: instance.to_string(),
            },
        )
    }

    /// One edge set per relation type, over every edge of the graph.
    pub fn relations(&self, ev: &Evaluator<'_>) -> Result<RelationSets> {
        let mut sets = vec![BTreeSet::new(); self.kit.relations().len()];
        for &(x, y) in self.graph.edges() {
            for (set, holds) in sets.iter_mut().zip(self.kit.classify(ev, x, y)?) {
                if holds {
                    set.insert((x, y));
                }
            }
        }
        Ok(sets)
    }

    /// Relation sets for every instance, in instance order.
    pub fn relations_per_instance(&self, instances: &[Assignment]) -> Result<Vec<RelationSets>> {
        instances
            .par_iter()
            .enumerate()
            .map(|(i, a)| self.relations(&self.evaluator(a, i)?))
            .collect()
    }

    fn polarities(&self) -> Vec<Option<Polarity>> {
        self.kit.relation_types().map(|t| t.polarity).collect()
    }
}

fn require_instances(instances: &[Assignment]) -> Result<()> {
    if instances.is_empty() {
        return Err(Error::Evaluation("no instances to evaluate".into()));
    }
    Ok(())
}

fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrevalenceRow {
    pub relation: String,
    pub symbol: String,
    /// Mean percentage of influences in the relation.
    pub percent: f64,
    /// Same, counting only influences between two classifications.
    pub classification_percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrevalenceReport {
    pub kit: String,
    pub instances: usize,
    /// Number of influences per instance.
    pub influences: usize,
    pub rows: Vec<PrevalenceRow>,
}

/// Mean over instances of `|R_t| / |I|` for every relation type `t`.
pub fn prevalence(
    c: &Classifier,
    kit: &ExplanationKit,
    instances: &[Assignment],
    settings: &EvalSettings,
) -> Result<PrevalenceReport> {
    require_instances(instances)?;
    let h = Harness::new(c, kit, settings)?;
    let total = h.graph().len();
    if total == 0 {
        return Err(Error::Evaluation("the influence graph has no edges".into()));
    }
    let per_instance = h.relations_per_instance(instances)?;
    let n = instances.len();
    let rows = kit
        .relation_types()
        .enumerate()
        .map(|(r, t)| {
            let all = per_instance.iter().map(|sets| percent(sets[r].len(), total));
            let classes = per_instance.iter().map(|sets| {
                let k = sets[r]
                    .iter()
                    .filter(|&&(x, y)| c.is_classification(x) && c.is_classification(y))
                    .count();
                percent(k, total)
            });
            PrevalenceRow {
                relation: t.label.clone(),
                symbol: t.symbol.clone(),
                percent: mean(all, n),
                classification_percent: mean(classes, n),
            }
        })
        .collect();
    Ok(PrevalenceReport {
        kit: kit.name().to_string(),
        instances: n,
        influences: total,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementReport {
    pub kit_a: String,
    pub kit_b: String,
    pub instances: usize,
    /// Size of the compared influence set.
    pub influences: usize,
    /// Mean percentage of influences given the same (possibly empty) set of
    /// polarities by both kits.
    pub agreement: f64,
    /// Mean of `|(A- ∩ B-) ∪ (A+ ∩ B+)| / |I|`.
    pub overlap: f64,
}

type PolarityEdges = (BTreeSet<(VarId, VarId)>, BTreeSet<(VarId, VarId)>);

fn by_polarity(
    polarities: &[Option<Polarity>],
    sets: &[BTreeSet<(VarId, VarId)>],
    universe: &BTreeSet<(VarId, VarId)>,
) -> PolarityEdges {
    let mut attacks = BTreeSet::new();
    let mut supports = BTreeSet::new();
    for (p, set) in polarities.iter().zip(sets) {
        let target = match p {
            Some(Polarity::Attack) => &mut attacks,
            Some(Polarity::Support) => &mut supports,
            None => continue,
        };
        target.extend(set.iter().filter(|e| universe.contains(e)));
    }
    (attacks, supports)
}

/// Agreement between two kits over the same instances.
///
/// Influences are compared over the full graph when both kits use it, and over
/// the input-output graph otherwise (full-graph relations restricted to it).
pub fn agreement(
    c: &Classifier,
    kit_a: &ExplanationKit,
    kit_b: &ExplanationKit,
    instances: &[Assignment],
    settings: &EvalSettings,
) -> Result<AgreementReport> {
    require_instances(instances)?;
    for kit in [kit_a, kit_b] {
        if !kit.is_dialectical() {
            return Err(Error::Evaluation(format!(
                "kit `{}` has no attack or support relations to compare",
                kit.name()
            )));
        }
    }
    let ha = Harness::new(c, kit_a, settings)?;
    let hb = Harness::new(c, kit_b, settings)?;
    let universe: BTreeSet<(VarId, VarId)> =
        if kit_a.graph_kind() == GraphKind::Full && kit_b.graph_kind() == GraphKind::Full {
            ha.graph().edges().clone()
        } else {
            io_influences(c, ha.outputs())?.edges().clone()
        };
    if universe.is_empty() {
        return Err(Error::Evaluation("no influences to compare".into()));
    }
    let (pa, pb) = (ha.polarities(), hb.polarities());
    let per_instance = instances
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let (a_att, a_sup) = by_polarity(&pa, &ha.relations(&ha.evaluator(a, i)?)?, &universe);
            let (b_att, b_sup) = by_polarity(&pb, &hb.relations(&hb.evaluator(a, i)?)?, &universe);
            let same = universe
                .iter()
                .filter(|e| {
                    a_att.contains(e) == b_att.contains(e) && a_sup.contains(e) == b_sup.contains(e)
                })
                .count();
            let overlap: BTreeSet<_> = a_att
                .intersection(&b_att)
                .chain(a_sup.intersection(&b_sup))
                .collect();
            Ok((same, overlap.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = instances.len();
    let total = universe.len();
    Ok(AgreementReport {
        kit_a: kit_a.name().to_string(),
        kit_b: kit_b.name().to_string(),
        instances: n,
        influences: total,
        agreement: mean(per_instance.iter().map(|&(s, _)| percent(s, total)), n),
        overlap: mean(per_instance.iter().map(|&(_, o)| percent(o, total)), n),
    })
}

/// One relation membership checked for dialectical monotonicity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub instance: usize,
    pub influencer: String,
    pub influencee: String,
    pub polarity: Polarity,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub kit: String,
    pub instances: usize,
    /// Attack and support memberships over all instances.
    pub population: usize,
    pub sampled: usize,
    pub violations: usize,
    /// Percentage of sampled memberships violating monotonicity (0 when none sampled).
    pub rate: f64,
    #[serde(skip)]
    pub examples: Vec<Membership>,
}

/// Posterior of `σ(a, y)` after setting `x` to `k`: from `y`'s own model with the
/// other influencers clamped on full graphs, by re-prediction on input-output graphs.
fn changed_probability(h: &Harness<'_>, ev: &Evaluator<'_>, x: VarId, y: VarId, k: usize) -> Result<f64> {
    let target = ev.value(y);
    match h.graph().kind() {
        GraphKind::Full => Ok(ev.local_posterior(y, Some((x, k)))?[target]),
        GraphKind::Io => {
            let changed = ev.input().clone().with(x, k);
            Ok(h.classifier().posterior(&changed, y)?.prob(target))
        }
    }
}

fn current_probability(h: &Harness<'_>, ev: &Evaluator<'_>, y: VarId) -> Result<f64> {
    match h.graph().kind() {
        GraphKind::Full => ev.current_probability(y),
        GraphKind::Io => Ok(h.classifier().posterior(ev.input(), y)?.prob(ev.value(y))),
    }
}

/// Whether a membership breaks dialectical monotonicity: some alternative value
/// of an attacker does not strictly raise the posterior of `σ(a, y)`, or of a
/// supporter does not strictly lower it.
fn violates(h: &Harness<'_>, ev: &Evaluator<'_>, x: VarId, y: VarId, polarity: Polarity) -> Result<bool> {
    let cur = current_probability(h, ev, y)?;
    for k in ev.alternatives(x) {
        let p = changed_probability(h, ev, x, y, k)?;
        let holds = match polarity {
            Polarity::Attack => p > cur,
            Polarity::Support => p < cur,
        };
        if !holds {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Rate of dialectical monotonicity violations over a uniform sample of attack
/// and support memberships (all of them when there are at most `sample_size`).
pub fn monotonicity_violations(
    c: &Classifier,
    kit: &ExplanationKit,
    instances: &[Assignment],
    sample_size: usize,
    seed: u64,
    settings: &EvalSettings,
) -> Result<MonotonicityReport> {
    require_instances(instances)?;
    if !kit.is_dialectical() {
        return Err(Error::Evaluation(format!(
            "kit `{}` has no attack or support relations",
            kit.name()
        )));
    }
    let h = Harness::new(c, kit, settings)?;
    let polarities = h.polarities();
    let population: Vec<Membership> = instances
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let ev = h.evaluator(a, i)?;
            let sets = h.relations(&ev)?;
            let mut out = Vec::new();
            for (p, set) in polarities.iter().zip(&sets) {
                let Some(p) = *p else { continue };
                for &(x, y) in set {
                    out.push(Membership {
                        instance: i,
                        influencer: c.name(x).to_string(),
                        influencee: c.name(y).to_string(),
                        polarity: p,
                        violated: violates(&h, &ev, x, y, p)?,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let sample: Vec<&Membership> = if population.len() <= sample_size {
        population.iter().collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, population.len(), sample_size).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| &population[i]).collect()
    };
    let violations = sample.iter().filter(|m| m.violated).count();
    Ok(MonotonicityReport {
        kit: kit.name().to_string(),
        instances: instances.len(),
        population: population.len(),
        sampled: sample.len(),
        violations,
        rate: percent(violations, sample.len()),
        examples: sample
            .into_iter()
            .filter(|m| m.violated)
            .take(10)
            .cloned()
            .collect(),
    })
}

/// Work done generating one explanation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexityProbe {
    pub instance: usize,
    pub explanandum: String,
    /// Influences visited while generating.
    pub reached: usize,
    /// Instrumented count of posterior evaluations.
    pub posterior_evaluations: usize,
    /// `1 + Σ (|V(x)| - 1)` over the visited influences `(x, y)`.
    pub linear_bound: usize,
    /// Combinations enumerated by counterfactual relations.
    pub enumerated: u64,
}

/// Generates the explanation of `σ(a, e)` and reports the work it took.
pub fn complexity_probe(
    h: &Harness<'_>,
    e: VarId,
    a: &Assignment,
    instance: usize,
) -> Result<ComplexityProbe> {
    let c = h.classifier();
    let ev = h.evaluator(a, instance)?;
    idx::generate(&ev, h.kit(), e)?;
    let reached = h.graph().edges_reaching(e);
    let linear_bound = 1 + reached
        .iter()
        .map(|&(x, _)| c.domain(x).len() - 1)
        .sum::<usize>();
    Ok(ComplexityProbe {
        instance,
        explanandum: c.name(e).to_string(),
        reached: reached.len(),
        posterior_evaluations: ev.posterior_evaluations(),
        linear_bound,
        enumerated: ev.enumerated(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub kit: String,
    pub probes: Vec<ComplexityProbe>,
}

impl ComplexityReport {
    /// Probes whose count equals the linear bound.
    pub fn matching(&self) -> usize {
        self.probes
            .iter()
            .filter(|p| p.posterior_evaluations == p.linear_bound)
            .count()
    }
}

/// Complexity probes for every instance and every output.
pub fn complexity(
    c: &Classifier,
    kit: &ExplanationKit,
    instances: &[Assignment],
    settings: &EvalSettings,
) -> Result<ComplexityReport> {
    require_instances(instances)?;
    let h = Harness::new(c, kit, settings)?;
    let outputs: Vec<VarId> = h.outputs().iter().copied().collect();
    let probes = instances
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            outputs
                .iter()
                .map(|&e| complexity_probe(&h, e, a, i))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(ComplexityReport {
        kit: kit.name().to_string(),
        probes,
    })
}
