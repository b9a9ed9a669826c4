//! `idx`: train Bayesian network classifiers, predict, and generate, validate and
//! evaluate influence-driven explanations.
//!
//! Exit codes: 0 success, 1 usage, 2 data or schema error, 3 computational
//! budget exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use idx_core::attribution::{AttributionParams, AttributionRegistry};
use idx_core::evaluation::{
    agreement, check_propositions, complexity, monotonicity_violations, prevalence, EvalSettings,
    Harness, Report,
};
use idx_core::idx::{generate, validate, Idx};
use idx_core::influence::influences;
use idx_core::kits::{load_definition, ExplanationKit, KitRegistry, DEFAULT_CF_BUDGET};
use idx_core::learning::{self, encode_dataset, encode_row, split, Dataset, LearnConfig};
use idx_core::{Assignment, Classifier, VarId};

#[derive(Debug, Parser)]
#[command(name = "idx", version, about = "Influence-driven explanations for Bayesian network classifiers")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Training configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for splits, attribution sampling and evaluation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fitted classifier JSON.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Explanation kit: a built-in name or a kit definition JSON file.
    #[arg(long, global = true, default_value = "md")]
    kit: String,
    /// Attribution source for attribution kits (`surrogate`/`lime`, `shapley`/`shap`, `file:<path>`).
    #[arg(long, global = true)]
    attr: Option<String>,
    /// Perturbations drawn by the surrogate attribution.
    #[arg(long, global = true, default_value_t = AttributionParams::default().samples)]
    attr_samples: usize,
    /// Cap on enumerated combinations for counterfactual relations.
    #[arg(long, global = true, default_value_t = DEFAULT_CF_BUDGET)]
    budget: u128,
    /// Worker threads for evaluation; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a classifier from a CSV dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Also split the data, fitting on the training part and writing the test part here.
        #[arg(long)]
        test_out: Option<PathBuf>,
    },
    /// Decide every classification for each row of a CSV file.
    Predict {
        #[arg(long)]
        data: PathBuf,
    },
    /// Explain one decision.
    Explain {
        /// Inline input, e.g. `w=l,t=m,p=l`.
        #[arg(long, conflicts_with_all = ["data", "row"])]
        instance: Option<String>,
        /// CSV file holding the input; used with `--row`.
        #[arg(long, requires = "row")]
        data: Option<PathBuf>,
        /// Zero-based data row.
        #[arg(long, requires = "data")]
        row: Option<usize>,
        /// Classification to explain; defaults to the only one.
        #[arg(long)]
        explanandum: Option<String>,
        /// Outputs of the input-output graph (comma-separated); defaults to the explanandum.
        #[arg(long, value_delimiter = ',')]
        outputs: Vec<String>,
        /// Also write the Graphviz rendering here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check an explanation against the model and its recorded input.
    Validate {
        #[arg(long)]
        idx: PathBuf,
    },
    /// Compute an evaluation report.
    Evaluate {
        #[arg(long, value_enum)]
        report: ReportKind,
        /// Instances CSV (not needed for `props`).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Second kit for `agreement`.
        #[arg(long)]
        against: Option<String>,
        /// Outputs of input-output graphs (comma-separated); defaults to every classification.
        #[arg(long, value_delimiter = ',')]
        outputs: Vec<String>,
        /// Relation memberships sampled by `monotonicity`.
        #[arg(long, default_value_t = 100)]
        sample_size: usize,
        /// Random classifiers checked by `props`.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Render an explanation JSON, or the model's influence graph, as DOT.
    Export {
        /// Explanation JSON; without it the influence graph of `--model` is rendered.
        #[arg(long)]
        idx: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportKind {
    Prevalence,
    Agreement,
    Monotonicity,
    Complexity,
    Props,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Table,
}

/// Invocation errors detected after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Usage(message.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match e.downcast_ref::<idx_core::Error>() {
        Some(err) if err.is_budget() => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Train { data, test_out } => train(g, data, test_out.as_deref()),
        Command::Predict { data } => predict(g, data),
        Command::Explain {
            instance,
            data,
            row,
            explanandum,
            outputs,
            dot,
        } => {
            let c = model(g)?;
            let (a, id) = match (instance, data, row) {
                (Some(text), _, _) => (c.parse_assignment(text)?, 0),
                (None, Some(path), Some(row)) => (read_row(&c, path, *row)?, *row),
                _ => return Err(usage("give --instance, or --data with --row")),
            };
            explain(g, &c, &a, id, explanandum.as_deref(), outputs, dot.as_deref())
        }
        Command::Validate { idx } => {
            let c = model(g)?;
            let idx = Idx::load(idx)?;
            check(g, &c, &idx)
        }
        Command::Evaluate {
            report,
            data,
            against,
            outputs,
            sample_size,
            trials,
            format,
        } => {
            let text = evaluate(g, *report, data.as_deref(), against.as_deref(), outputs, *sample_size, *trials)?;
            let text = match format {
                Format::Csv => text.to_csv()?,
                Format::Table => text.to_table(),
            };
            emit(g, &text)
        }
        Command::Export { idx } => match idx {
            Some(path) => emit(g, &Idx::load(path)?.to_dot()),
            None => {
                let c = model(g)?;
                emit(g, &influences(&c).to_dot(&c))
            }
        },
    }
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn model(g: &Global) -> Result<Classifier> {
    let path = g.model.as_ref().ok_or_else(|| usage("--model is required"))?;
    Classifier::load(path).with_context(|| format!("loading {}", path.display()))
}

fn config(g: &Global) -> Result<LearnConfig> {
    let path = g.config.as_ref().ok_or_else(|| usage("--config is required"))?;
    LearnConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn kit(name: &str) -> Result<ExplanationKit> {
    let mut registry = KitRegistry::builtin();
    if Path::new(name).is_file() {
        let def = load_definition(name)?;
        let name = def.name.clone();
        registry.register_kit(def)?;
        return Ok(registry.kit(&name)?);
    }
    registry.kit(name).map_err(|e| usage(e.to_string()))
}

fn params(g: &Global) -> AttributionParams {
    AttributionParams {
        samples: g.attr_samples,
        seed: g.seed.unwrap_or(0),
        ..AttributionParams::default()
    }
}

fn settings(g: &Global, outputs: &[String]) -> Result<EvalSettings> {
    if let Some(name) = &g.attr {
        if !name.starts_with("file:") {
            AttributionRegistry::builtin()
                .source(name, &params(g))
                .map_err(|e| usage(e.to_string()))?;
        }
    }
    Ok(EvalSettings {
        outputs: outputs.to_vec(),
        budget: g.budget,
        attribution: g.attr.clone(),
        params: params(g),
    })
}

fn train(g: &Global, data: &Path, test_out: Option<&Path>) -> Result<()> {
    let cfg = config(g)?;
    let d = Dataset::load(data).with_context(|| format!("loading {}", data.display()))?;
    let c = match test_out {
        Some(path) => {
            let class = cfg
                .classes
                .first()
                .cloned()
                .or_else(|| cfg.structure.as_ref().and_then(|s| s.edges.first()).map(|e| e.0.clone()))
                .ok_or_else(|| anyhow!("the configuration names no class column to stratify on"))?;
            let s = split(&d, &class, cfg.split.ratio, g.seed.unwrap_or(cfg.split.seed))?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            fs::write(path, s.test.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
            learning::fit(&s.train, &cfg)?
        }
        None => learning::fit(&d, &cfg)?,
    };
    for w in c.warnings() {
        eprintln!("warning: {w}");
    }
    emit(g, &c.to_json()?)
}

fn predict(g: &Global, data: &Path) -> Result<()> {
    let c = model(g)?;
    let d = Dataset::load(data).with_context(|| format!("loading {}", data.display()))?;
    let observations = c.observations();
    let classes = c.classifications();
    let mut header: Vec<String> = observations.iter().map(|&x| c.name(x).to_string()).collect();
    for &y in &classes {
        header.push(c.name(y).to_string());
        for v in c.domain(y).values() {
            header.push(format!("P({}={v})", c.name(y)));
        }
    }
    let mut rows = Vec::new();
    for a in encode_dataset(&c, &d)? {
        let decided = c.predict_all(&a)?;
        let mut row: Vec<String> = observations
            .iter()
            .map(|&x| c.label(x, decided.get(x).unwrap_or_default()).to_string())
            .collect();
        for &y in &classes {
            let value = decided.get(y).unwrap_or_default();
            row.push(c.label(y, value).to_string());
            let post = c.posterior(&a, y)?;
            row.extend(post.probs.iter().map(|p| format!("{p:.6}")));
        }
        rows.push(row);
    }
    emit(g, &Dataset::new(header, rows)?.to_csv()?)
}

fn read_row(c: &Classifier, path: &Path, row: usize) -> Result<Assignment> {
    let d = Dataset::load(path).with_context(|| format!("loading {}", path.display()))?;
    let record = d
        .rows()
        .get(row)
        .ok_or_else(|| usage(format!("row {row} is out of range: {} has {} rows", path.display(), d.len())))?;
    Ok(encode_row(c, d.columns(), record, false)?)
}

fn explanandum(c: &Classifier, name: Option<&str>) -> Result<VarId> {
    match name {
        Some(n) => Ok(c.var(n)?),
        None => match c.classifications().as_slice() {
            [only] => Ok(*only),
            many => Err(usage(format!(
                "--explanandum is required: the model has {} classifications",
                many.len()
            ))),
        },
    }
}

fn explain(
    g: &Global,
    c: &Classifier,
    a: &Assignment,
    instance: usize,
    e: Option<&str>,
    outputs: &[String],
    dot: Option<&Path>,
) -> Result<()> {
    let kit = kit(&g.kit)?;
    let e = explanandum(c, e)?;
    let outputs = if outputs.is_empty() {
        vec![c.name(e).to_string()]
    } else {
        outputs.to_vec()
    };
    let h = Harness::new(c, &kit, &settings(g, &outputs)?)?;
    let ev = h.evaluator(a, instance)?;
    let idx = generate(&ev, &kit, e)?;
    for note in ev.diagnostics() {
        eprintln!("note: {note}");
    }
    if let Some(path) = dot {
        fs::write(path, idx.to_dot()).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(g, &(idx.to_json()? + "\n"))
}

fn check(g: &Global, c: &Classifier, idx: &Idx) -> Result<()> {
    let kit = if Path::new(&g.kit).is_file() { kit(&g.kit)? } else { kit(&idx.kit)? };
    let mut input = String::new();
    for (k, v) in &idx.input {
        if !input.is_empty() {
            input.push(',');
        }
        input.push_str(&format!("{k}={v}"));
    }
    let a = c.parse_assignment(&input)?;
    let outputs = vec![idx.explanandum.clone()];
    let h = Harness::new(c, &kit, &settings(g, &outputs)?)?;
    let ev = h.evaluator(&a, 0)?;
    let violations = validate(idx, &ev, &kit)?;
    if violations.is_empty() {
        return emit(g, "valid\n");
    }
    let text: String = violations.iter().map(|v| format!("{v}\n")).collect();
    emit(g, &text)?;
    Err(anyhow!("{} violation(s)", violations.len()))
}

fn evaluate(
    g: &Global,
    report: ReportKind,
    data: Option<&Path>,
    against: Option<&str>,
    outputs: &[String],
    sample_size: usize,
    trials: usize,
) -> Result<Box<dyn Report>> {
    let seed = g.seed.unwrap_or(0);
    if let ReportKind::Props = report {
        if trials == 0 {
            return Err(usage("--trials must be positive"));
        }
        return Ok(Box::new(check_propositions(seed, trials)?));
    }
    let c = model(g)?;
    let data = data.ok_or_else(|| usage("--data is required for this report"))?;
    let d = Dataset::load(data).with_context(|| format!("loading {}", data.display()))?;
    let instances = encode_dataset(&c, &d)?;
    let kit = kit(&g.kit)?;
    let s = settings(g, outputs)?;
    Ok(match report {
        ReportKind::Prevalence => Box::new(prevalence(&c, &kit, &instances, &s)?),
        ReportKind::Agreement => {
            let other = kit_or_usage(against)?;
            Box::new(agreement(&c, &kit, &other, &instances, &s)?)
        }
        ReportKind::Monotonicity => {
            Box::new(monotonicity_violations(&c, &kit, &instances, sample_size, seed, &s)?)
        }
        ReportKind::Complexity => Box::new(complexity(&c, &kit, &instances, &s)?),
        ReportKind::Props => unreachable!(),
    })
}

fn kit_or_usage(name: Option<&str>) -> Result<ExplanationKit> {
    kit(name.ok_or_else(|| usage("--against is required for agreement"))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_errors_map_to_three() {
        let e: anyhow::Error = idx_core::Error::BudgetExceeded { needed: 9, budget: 1 }.into();
        assert_eq!(exit_code(&e), 3);
        assert_eq!(exit_code(&usage("x")), 1);
        assert_eq!(exit_code(&anyhow::Error::from(idx_core::Error::UnknownVariable("q".into()))), 2);
    }
}
