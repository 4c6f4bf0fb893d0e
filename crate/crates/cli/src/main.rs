//! `zo-simplex`: command-line harness for zeroth-order optimization on the
//! probability simplex.
//!
//! Subcommands: `run` (experiment sweep), `bias` (estimator bias study),
//! `fit` (log-log rate fit over a summary CSV), `project` (one-shot simplex
//! projection), `sample` (Dirichlet draws). Exit codes: 0 success, 2
//! configuration error, 3 failed `fit --assert`, 1 i/o failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zo_simplex::harness::{
    bias_study, parse_seed, rate_fit, read_summary_csv, run_experiment, BiasStudyConfig,
    ExperimentConfig, HarnessError, SLOPE_BAND,
};
use zo_simplex::optimizer::{Algo, Schedule};
use zo_simplex::simplex::project_to_simplex;
use zo_simplex::DirichletSampler;

/// Directory used for outputs when `--out` is not given.
const OUT_DIR_ENV: &str = "ZO_SIMPLEX_OUT_DIR";

const EXIT_CONFIG: u8 = 2;
const EXIT_ASSERT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "zo-simplex",
    version,
    about = "Zeroth-order optimization on the probability simplex"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimizer sweep over horizons and seeds, writing a summary CSV
    Run(RunArgs),
    /// Run the estimator bias study over a (d, alpha, delta, objective) grid
    Bias(BiasArgs),
    /// Fit log-log slopes of mean gap vs horizon from a summary CSV
    Fit(FitArgs),
    /// Project a comma-separated vector onto the probability simplex
    Project(ProjectArgs),
    /// Emit Dirichlet draws as CSV
    Sample(SampleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Algorithm: "pgd" or "ew"
    #[arg(long)]
    algo: String,
    /// Objective id: linear:<seed>, quaddist:<seed>, or psdquad:<seed>
    #[arg(long)]
    objective: String,
    /// Simplex dimension
    #[arg(long)]
    d: usize,
    /// Dirichlet concentration
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Step-size proportionality constant
    #[arg(long = "c-eta", default_value_t = Schedule::DEFAULT_C_ETA)]
    c_eta: f64,
    /// Mixing-parameter proportionality constant
    #[arg(long = "c-delta", default_value_t = Schedule::DEFAULT_C_DELTA)]
    c_delta: f64,
    /// Comma-separated strictly increasing horizons, e.g. 100,1000,10000
    #[arg(long, value_delimiter = ',')]
    horizons: Vec<usize>,
    /// Number of seeds per horizon
    #[arg(long = "seeds", default_value_t = 20)]
    n_seeds: u64,
    /// Base seed (decimal or 0x-hex); cells use base_seed..base_seed+seeds
    #[arg(long = "base-seed", default_value = "0")]
    base_seed: String,
    /// Output CSV path (default: results.csv under $ZO_SIMPLEX_OUT_DIR or .)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-iteration traces to <out-stem>_trace.csv
    #[arg(long = "full-trace")]
    full_trace: bool,
}

#[derive(Args)]
struct BiasArgs {
    /// Objective ids, comma separated
    #[arg(long, value_delimiter = ',')]
    objective: Vec<String>,
    /// Dimensions, comma separated
    #[arg(long, value_delimiter = ',')]
    d: Vec<usize>,
    /// Concentrations, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1")]
    alpha: Vec<f64>,
    /// Mixing parameters, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    delta: Vec<f64>,
    /// Monte-Carlo samples per grid cell (minimum 1000)
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Base seed (decimal or 0x-hex); cells use independent streams of it
    #[arg(long = "base-seed", default_value = "0")]
    base_seed: String,
    /// Output CSV path (default: bias.csv under $ZO_SIMPLEX_OUT_DIR or .)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Summary CSV produced by `run`
    #[arg(long)]
    input: PathBuf,
    /// Exit with status 3 unless every group's slope lies inside the band
    #[arg(long)]
    assert: bool,
    /// Lower edge of the acceptance band
    #[arg(long = "slope-min", default_value_t = SLOPE_BAND.0, allow_negative_numbers = true)]
    slope_min: f64,
    /// Upper edge of the acceptance band
    #[arg(long = "slope-max", default_value_t = SLOPE_BAND.1, allow_negative_numbers = true)]
    slope_max: f64,
}

#[derive(Args)]
struct ProjectArgs {
    /// Comma-separated coordinates, e.g. 0.5,0.7
    #[arg(allow_hyphen_values = true)]
    vector: String,
}

#[derive(Args)]
struct SampleArgs {
    /// Simplex dimension
    #[arg(long)]
    d: usize,
    /// Dirichlet concentration
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Number of draws
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Seed (decimal or 0x-hex)
    #[arg(long = "base-seed", default_value = "0")]
    base_seed: String,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

struct CliFailure {
    code: u8,
    message: String,
}

impl CliFailure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<HarnessError> for CliFailure {
    fn from(e: HarnessError) -> Self {
        let code = match &e {
            HarnessError::ConfigInvalid(_)
            | HarnessError::ObjectiveUnknown(_)
            | HarnessError::InsufficientHorizons { .. } => EXIT_CONFIG,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn default_out(name: &str) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(name),
        None => PathBuf::from(name),
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CliFailure> {
    let algo: Algo = args
        .algo
        .parse()
        .map_err(|e: zo_simplex::optimizer::OptimizerError| CliFailure::config(e.to_string()))?;
    let cfg = ExperimentConfig {
        algo,
        objective_id: args.objective.clone(),
        d: args.d,
        alpha: args.alpha,
        c_eta: args.c_eta,
        c_delta: args.c_delta,
        horizons: args.horizons.clone(),
        n_seeds: args.n_seeds,
        base_seed: parse_seed(&args.base_seed)?,
        output_path: args
            .out
            .clone()
            .unwrap_or_else(|| default_out("results.csv")),
        full_trace: args.full_trace,
    };
    let outcome = run_experiment(&cfg)?;
    if outcome.stability_warnings > 0 {
        eprintln!(
            "warning: {} run(s) violate eta*d(alpha*d+1)*B/delta <= 1; short-horizon results are diagnostics only",
            outcome.stability_warnings
        );
    }
    println!(
        "wrote {} rows to {}",
        outcome.rows.len(),
        outcome.csv_path.display()
    );
    if let Some(trace) = outcome.trace_path {
        println!("wrote per-iteration traces to {}", trace.display());
    }
    Ok(())
}

fn cmd_bias(args: &BiasArgs) -> Result<(), CliFailure> {
    let out = args.out.clone().unwrap_or_else(|| default_out("bias.csv"));
    let cfg = BiasStudyConfig {
        objective_ids: args.objective.clone(),
        ds: args.d.clone(),
        alphas: args.alpha.clone(),
        deltas: args.delta.clone(),
        n_samples: args.n,
        base_seed: parse_seed(&args.base_seed)?,
        output_path: Some(out.clone()),
    };
    let outcome = bias_study(&cfg)?;
    println!(
        "bias study: {} cells, {} pass, {} fail -> {}",
        outcome.reports.len(),
        outcome.n_pass,
        outcome.n_fail,
        out.display()
    );
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliFailure> {
    if args.slope_min > args.slope_max {
        return Err(CliFailure::config(format!(
            "slope band is empty: [{}, {}]",
            args.slope_min, args.slope_max
        )));
    }
    let rows = read_summary_csv(&args.input)?;
    if rows.is_empty() {
        return Err(CliFailure::config(format!(
            "no rows in {}",
            args.input.display()
        )));
    }
    let fits = rate_fit(&rows)?;
    println!("algo,objective,d,alpha,horizons,slope,intercept,r_squared");
    let mut out_of_band = Vec::new();
    for g in &fits {
        println!(
            "{},{},{},{},{},{},{},{}",
            g.algo,
            g.objective,
            g.d,
            g.alpha,
            g.fit.points.len(),
            g.fit.slope,
            g.fit.intercept,
            g.fit.r_squared
        );
        if g.fit.slope < args.slope_min || g.fit.slope > args.slope_max {
            out_of_band.push(format!(
                "{}/{}/d={}/alpha={}: slope {:.4} outside [{}, {}]",
                g.algo, g.objective, g.d, g.alpha, g.fit.slope, args.slope_min, args.slope_max
            ));
        }
    }
    if args.assert && !out_of_band.is_empty() {
        return Err(CliFailure {
            code: EXIT_ASSERT,
            message: out_of_band.join("\n"),
        });
    }
    Ok(())
}

fn cmd_project(args: &ProjectArgs) -> Result<(), CliFailure> {
    let coords: Vec<f64> = args
        .vector
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliFailure::config(format!("cannot parse vector {:?}", args.vector)))?;
    let projected = project_to_simplex(&coords).map_err(|e| CliFailure::config(e.to_string()))?;
    let rendered: Vec<String> = projected.coords().iter().map(f64::to_string).collect();
    println!("{}", rendered.join(","));
    Ok(())
}

fn cmd_sample(args: &SampleArgs) -> Result<(), CliFailure> {
    let seed = parse_seed(&args.base_seed)?;
    let mut sampler = DirichletSampler::new(args.d, args.alpha, seed)
        .map_err(|e| CliFailure::config(e.to_string()))?;
    let header: Vec<String> = (0..args.d).map(|i| format!("u{i}")).collect();
    let mut lines = vec![header.join(",")];
    for _ in 0..args.n {
        let u = sampler
            .sample()
            .map_err(|e| CliFailure::io(e.to_string()))?;
        let row: Vec<String> = u.coords().iter().map(f64::to_string).collect();
        lines.push(row.join(","));
    }
    let body = lines.join("\n") + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliFailure::io(e.to_string()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bias(args) => cmd_bias(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Project(args) => cmd_project(args),
        Command::Sample(args) => cmd_sample(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
