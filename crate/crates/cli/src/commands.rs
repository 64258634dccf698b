//! Subcommands of the `cfcheck` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use cfcheck_core::mdp::{simulate_path, Start};
use cfcheck_core::rng::substream;
use cfcheck_core::scm::{abduct_path, check_consistency};
use cfcheck_core::statcheck::{CheckParams, CiMethod, DeltaMode, Estimate, Outcome, Truth};
use cfcheck_core::{parse_formula, AbductionMethod, Checker, Path};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::experiment::{self, Experiment, ExperimentConfig};
use crate::model_file::{load_model, LoadedModel};
use crate::trace_file::{load_traces, TraceFile};
use crate::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "cfcheck", version, about = "Statistical checking of counterfactual temporal properties of MDPs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate traces of a named policy.
    Simulate(SimulateArgs),
    /// Check a formula against an observed trace.
    Check(CheckArgs),
    /// Sample posterior noise for an observed trace.
    Abduct(AbductArgs),
    /// Run one of the grid-world experiments.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Master seed; falls back to CFCHECK_SEED, then 0.
    #[arg(long, env = "CFCHECK_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub policy: String,
    /// States per trace.
    #[arg(long, default_value_t = 10)]
    pub length: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CiArg {
    ClopperPearson,
    Wald,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DeltaArg {
    Paired,
    Unpaired,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    /// Which trace of a multi-trace file to check.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub formula: String,
    /// Rollouts per estimate.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Posterior contexts per estimate; defaults to n.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value = "exact", value_parser = parse_method)]
    pub method: AbductionMethod,
    #[arg(long, value_enum, default_value = "clopper-pearson")]
    pub ci: CiArg,
    #[arg(long, value_enum, default_value = "paired")]
    pub delta: DeltaArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AbductArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Posterior samples.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value = "exact", value_parser = parse_method)]
    pub method: AbductionMethod,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// sanity, cf_offset1, cf_offset2 or beyond.
    #[arg(value_parser = parse_experiment)]
    pub name: Experiment,
    /// Grid-world model file; the benchmark grid when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 100)]
    pub paths: usize,
    #[arg(long, default_value_t = 20)]
    pub contexts: usize,
    /// Bound T of the reach-avoid property.
    #[arg(long = "horizon", default_value_t = 10)]
    pub horizon: u32,
    /// Slip probability of the benchmark grid; ignored with --model.
    #[arg(long, default_value_t = 0.1)]
    pub slip: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value = "rejection", value_parser = parse_method)]
    pub method: AbductionMethod,
    /// Per-repetition CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON; stderr when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<AbductionMethod, String> {
    s.parse()
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse()
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

pub fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Check(a) => check(&a),
        Command::Abduct(a) => abduct(&a),
        Command::Experiment(a) => run_experiment(&a),
    }
}

fn emit(out: Option<&FsPath>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::io(FsPath::new("<stdout>"), e)),
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<i32, CliError> {
    let model = load_model(&a.model)?;
    let policy = model.policy(&a.policy)?;
    let traces = (0..a.count)
        .map(|i| {
            let p = simulate_path(&model.mdp, policy, Start::Init, a.length, &mut substream(a.seed.seed, i as u64))?;
            Ok(TraceFile::from_path(&a.policy, &p, &model.mdp))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut text = serde_json::to_vec_pretty(&traces).expect("traces serialise");
    text.push(b'\n');
    emit(a.out.as_deref(), &text)?;
    Ok(exit::OK)
}

/// Loads trace `index` and checks it against its generating policy.
fn observed(model: &LoadedModel, file: &FsPath, index: usize) -> Result<(String, Path), CliError> {
    let traces = load_traces(file)?;
    let t = traces.get(index).ok_or_else(|| {
        CliError::Usage(format!("{}: no trace at index {index} ({} in file)", file.display(), traces.len()))
    })?;
    let path = t.to_path(&model.mdp)?;
    check_consistency(&model.mdp, model.policy(&t.policy)?, &path)?;
    Ok((t.policy.clone(), path))
}

/// Verdict and estimate output of `check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictJson {
    pub formula: String,
    /// `true`, `false`, `undecided`, or `estimate` for `=?` formulas.
    pub verdict: String,
    pub mean: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub n: Option<usize>,
    pub method: Option<CiMethod>,
    pub seed: u64,
}

impl VerdictJson {
    fn new(formula: String, verdict: &str, est: Option<Estimate>, seed: u64) -> Self {
        Self {
            formula,
            verdict: verdict.to_string(),
            mean: est.map(|e| e.mean),
            ci: est.map(|e| [e.ci_low, e.ci_high]),
            n: est.map(|e| e.n),
            method: est.map(|e| e.method),
            seed,
        }
    }
}

pub fn check(a: &CheckArgs) -> Result<i32, CliError> {
    let formula = parse_formula(&a.formula)?;
    let model = load_model(&a.model)?;
    let (policy_name, tau) = observed(&model, &a.trace, a.index)?;
    let params = CheckParams {
        n: a.n,
        m: a.m,
        alpha: a.alpha,
        seed: a.seed.seed,
        jobs: a.jobs,
        method: a.method,
        ci: match a.ci {
            CiArg::ClopperPearson => CiMethod::ClopperPearson,
            CiArg::Wald => CiMethod::Wald,
        },
        delta_mode: match a.delta {
            DeltaArg::Paired => DeltaMode::Paired,
            DeltaArg::Unpaired => DeltaMode::Unpaired,
        },
        ..CheckParams::default()
    };
    let checker = Checker::new(&model.mdp, model.policy(&policy_name)?, &model.registry, params)?;
    let text = formula.to_string();
    let (json, code) = match checker.evaluate(&tau, &formula)? {
        Outcome::Estimate(e) => (VerdictJson::new(text, "estimate", Some(e), a.seed.seed), exit::OK),
        Outcome::Verdict(v) => {
            let (name, code) = match v.truth {
                Truth::True => ("true", exit::OK),
                Truth::False => ("false", exit::FALSE),
                Truth::Undecided => ("undecided", exit::UNDECIDED),
            };
            (VerdictJson::new(text, name, v.estimate, a.seed.seed), code)
        }
    };
    let mut out = serde_json::to_vec(&json).expect("verdict serialises");
    out.push(b'\n');
    emit(a.out.as_deref(), &out)?;
    Ok(code)
}

pub fn abduct(a: &AbductArgs) -> Result<i32, CliError> {
    let model = load_model(&a.model)?;
    let (policy_name, tau) = observed(&model, &a.trace, a.index)?;
    let policy = model.policy(&policy_name)?;
    let contexts = abduct_path(&model.mdp, policy, &tau, a.n, a.method, &mut substream(a.seed.seed, 0))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(["sample", "step", "state", "gumbel_value"]).map_err(csv_err)?;
    for (i, ctx) in contexts.iter().enumerate() {
        for (t, g) in ctx.steps().iter().enumerate() {
            for (s, v) in g.iter().enumerate() {
                let state = model.mdp.state_name(cfcheck_core::StateId(s));
                w.write_record([i.to_string(), (t + 1).to_string(), state.to_string(), v.to_string()])
                    .map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    emit(a.out.as_deref(), &bytes)?;
    Ok(exit::OK)
}

pub fn run_experiment(a: &ExperimentArgs) -> Result<i32, CliError> {
    let model = match &a.model {
        Some(p) => load_model(p)?,
        None => {
            let cfg = cfcheck_core::mdp::GridConfig { slip: a.slip, ..cfcheck_core::mdp::GridConfig::benchmark() };
            LoadedModel::from_grid(cfcheck_core::mdp::build_gridworld(&cfg)?)?
        }
    };
    let cfg = ExperimentConfig {
        experiment: a.name,
        reps: a.reps,
        paths: a.paths,
        contexts: a.contexts,
        horizon: a.horizon,
        seed: a.seed.seed,
        jobs: a.jobs,
        method: a.method,
    };
    let report = experiment::run(&model, &cfg)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    let mut summary = serde_json::to_vec_pretty(&report).expect("report serialises");
    summary.push(b'\n');
    emit(a.out.as_deref(), &csv)?;
    match &a.summary {
        Some(p) => std::fs::write(p, &summary).map_err(|e| CliError::io(p, e))?,
        None => std::io::stderr().write_all(&summary).map_err(|e| CliError::io(FsPath::new("<stderr>"), e))?,
    }
    Ok(exit::OK)
}
