use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use subsketch_core::harness::{
    run_estimate, run_validation_suite, EstimateOptions, Family, GeneratorSpec, Mode,
};
use subsketch_core::scheduler::SolverStrategy;
use subsketch_core::{Error, Instance, Params};

const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_RUNTIME: u8 = 1;

#[derive(Parser)]
#[command(name = "subsketch", version, about = "Sublinear-time makespan estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the optimal makespan of one instance.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo validation suite.
    Validate(ValidateArgs),
    /// Write a synthetic instance, one processing time per line.
    Gen(GenArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["instance", "generate"]))]
struct EstimateArgs {
    /// Instance file: one time per line, or a JSON array.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Generator spec, e.g. `two_point:n=10000,seed=3,high=50`.
    #[arg(long)]
    generate: Option<String>,
    #[arg(long)]
    mode: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0 / 12.0)]
    gamma0: f64,
    #[arg(long, env = "SUBSKETCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Compare against the exact optimum (small or structured instances only).
    #[arg(long)]
    validate: bool,
    /// Expand the sketch schedule onto the real jobs.
    #[arg(long)]
    emit_schedule: bool,
    /// Machine of each job as a JSON array, written when --emit-schedule is set.
    #[arg(long)]
    schedule_out: Option<PathBuf>,
    /// Sketch-stage delta instead of epsilon / (12 c m).
    #[arg(long)]
    sketch_delta: Option<f64>,
    /// Multiplier on the sampling budgets.
    #[arg(long, default_value_t = 1.0)]
    budget_scale: f64,
    /// Refuse runs planning more draws than this.
    #[arg(long)]
    max_draws: Option<u64>,
    /// exact_bb, lpt or auto.
    #[arg(long, default_value = "auto")]
    solver: String,
    /// Report destination; appended as one JSON line.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    suite: String,
    #[arg(long)]
    trials: usize,
    #[arg(long, env = "SUBSKETCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Criterion lines as JSONL; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long, env = "SUBSKETCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Family parameter as KEY=VALUE; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Core(Error),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn json_line(w: &mut impl Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    let line = serde_json::to_string(value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w, "{line}")?;
    Ok(())
}

fn append(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::options().create(true).append(true).open(path)?))
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let mode = Mode::parse(&args.mode)?;
    let mut params = Params::new(args.m, args.epsilon, args.gamma0)?;
    if let Some(d) = args.sketch_delta {
        params = params.with_sketch_delta(d)?;
    }
    let (instance, source) = match (&args.instance, &args.generate) {
        (Some(path), _) => (Instance::load(path)?, path.display().to_string()),
        (None, Some(spec)) => {
            let spec = GeneratorSpec::parse(spec, args.seed)?;
            (spec.generate()?, spec_label(&spec))
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let mut options = EstimateOptions::new(mode, params, args.seed);
    options.budget_scale = args.budget_scale;
    options.max_draws = args.max_draws;
    options.solver = SolverStrategy::parse(&args.solver)?;
    options.validate = args.validate;
    options.emit_schedule = args.emit_schedule || args.schedule_out.is_some();

    let outcome = run_estimate(&instance, &source, &options)?;
    let report = &outcome.report;
    info!(
        "{} n={} estimate={} draws={} entries={}",
        report.mode, report.n, report.estimate, report.draws_used, report.sketch_entries
    );
    let mut out = append(&args.out)?;
    out.write_all(report.to_json_line().as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()?;
    if let (Some(path), Some(schedule)) = (&args.schedule_out, &outcome.schedule) {
        let mut w = BufWriter::new(File::create(path)?);
        json_line(&mut w, &schedule.assignment())?;
        w.flush()?;
    }
    match &report.validation {
        Some(v) if !v.pass => Err(Failure::Validation(format!(
            "ratio {:.6} outside [{:.6}, {:.6}]",
            v.ratio, v.lower, v.upper
        ))),
        _ => Ok(()),
    }
}

fn spec_label(spec: &GeneratorSpec) -> String {
    let mut s = format!("{}:n={},seed={}", spec.family, spec.n, spec.seed);
    for (k, v) in &spec.params {
        s.push_str(&format!(",{k}={v}"));
    }
    s
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let summary = run_validation_suite(&args.suite, args.trials, args.seed)?;
    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(append(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    for c in &summary.criteria {
        json_line(
            &mut sink,
            &serde_json::json!({
                "suite": summary.suite,
                "trials": summary.trials,
                "seed": summary.seed,
                "criterion": c,
            }),
        )?;
        eprintln!("[{}] {}: {} (threshold {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.observed, c.threshold);
    }
    sink.flush()?;
    if summary.pass() {
        Ok(())
    } else {
        let failed = summary.criteria.iter().filter(|c| !c.pass).count();
        Err(Failure::Validation(format!("{failed} criteria failed in {}", summary.suite)))
    }
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let mut spec = GeneratorSpec::new(Family::parse(&args.family)?, args.n, args.seed);
    for p in &args.params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{p}`")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Config(format!("bad value for `{k}`: `{v}`")))?;
        spec = spec.with(k, v)?;
    }
    spec.generate()?.save(&args.out)?;
    info!("wrote {} jobs to {}", args.n, args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Validate(a) => validate(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}
