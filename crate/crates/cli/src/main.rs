//! `tauleap`: single paths, ensembles, stability curves and benchmark tables.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tauleap_core::{Method, TableId};

/// Exit status for a failed `--check`.
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "tauleap",
    version,
    about = "Stochastic simulation of chemical reaction networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one trajectory and write `t,<species>` rows.
    Simulate(SimulateArgs),
    /// Run an ensemble and report per-species moments at the final time.
    Mc(McArgs),
    /// Sample the stability functions of the stabilized scheme on [-ell, 0].
    Stability(StabilityArgs),
    /// Rerun a benchmark experiment at reduced sample count.
    Table(TableArgs),
    /// Density distance area between two distributions.
    Dda(DdaArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Built-in model name or path to a TOML model file.
    #[arg(long)]
    model: String,
    /// Comma-separated rate constants replacing a built-in model's defaults.
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    /// Comma-separated initial state replacing the model's default.
    #[arg(long, value_delimiter = ',')]
    initial: Option<Vec<f64>>,
    /// Conserved total of a built-in reduced model.
    #[arg(long)]
    total: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct MethodArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Step size; defaults to the model's suggested value.
    #[arg(long)]
    tau: Option<f64>,
    /// Final time; defaults to the model's suggested value.
    #[arg(long)]
    t_end: Option<f64>,
    /// Damping parameter of the stabilized methods.
    #[arg(long, default_value_t = tauleap_core::chebyshev::DEFAULT_EPS)]
    eps: f64,
    /// Fixed stage count instead of the automatic choice.
    #[arg(long)]
    stages: Option<usize>,
    /// Multiplier on the spectral radius estimate before choosing stages.
    #[arg(long, default_value_t = tauleap_core::spectral::SAFETY_FACTOR)]
    rho_safety: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Time between output rows; defaults to tau, or t_end / 1000 for the SSA.
    #[arg(long)]
    stride: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0: one per core). Output does not depend on it.
    #[arg(long, env = "TAULEAP_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Include wall-clock seconds in the report.
    #[arg(long)]
    timing: bool,
    /// Also write the empirical pdf of this species as `state,probability`.
    #[arg(long, requires = "pdf_output")]
    pdf_species: Option<String>,
    #[arg(long, requires = "pdf_species")]
    pdf_output: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    /// Stage count.
    #[arg(long, short)]
    s: usize,
    #[arg(long, default_value_t = tauleap_core::chebyshev::DEFAULT_EPS)]
    eps: f64,
    /// Number of grid points on [-ell, 0].
    #[arg(long, default_value_t = tauleap_core::StabilityCurve::DEFAULT_POINTS)]
    points: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(value_parser = parse_table)]
    table: TableId,
    /// Divides the full experiment's sample count.
    #[arg(long, default_value_t = 100)]
    scale: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, env = "TAULEAP_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Exit with status 1 unless every tolerance check passes.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    timing: bool,
    /// Report CSV; the human-readable summary always goes to standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write named metrics (stage averages, DDA values) as CSV.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DdaArgs {
    /// CSV with a `state,probability` header, or samples in the first column.
    first: PathBuf,
    second: PathBuf,
    /// Sample column to read instead of the first one.
    #[arg(long)]
    column: Option<String>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn parse_table(s: &str) -> Result<TableId, String> {
    s.parse::<TableId>().map_err(|e| e.to_string())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use tauleap_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(
            E::StageCapExceeded { .. }
            | E::DegenerateAmplification { .. }
            | E::Unstable { .. }
            | E::NewtonFailed { .. }
            | E::NonFinite { .. }
            | E::TooManyFailures { .. },
        ) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Mc(a) => commands::mc(a),
        Command::Stability(a) => commands::stability(a),
        Command::Table(a) => commands::table(a),
        Command::Dda(a) => commands::dda(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
