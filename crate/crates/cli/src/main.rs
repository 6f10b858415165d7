//! `ctrlsel` command-line tool: random systems, actuator placement, diminishing-returns checks,
//! brute-force baselines, the λ_min counterexample and minimum-energy inputs.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctrlsel::Error;

/// Exit codes, a stable contract.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const NUMERICAL: u8 = 2;
    pub const UNCONTROLLABLE: u8 = 3;
    pub const MISMATCH: u8 = 4;
    pub const SAMPLING_EXHAUSTED: u8 = 5;
    pub const ENUMERATION_GUARD: u8 = 6;
}

#[derive(Debug, Parser)]
#[command(name = "ctrlsel", version, about = "Actuator selection by greedy maximization of Gramian metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Greedy actuator placement; prints the selection as JSON.
    Place(PlaceArgs),
    /// Recomputes the λ_min counterexample gains and compares them with the reference values.
    Counterexample(CounterexampleArgs),
    /// Samples triples A ⊂ B, a ∉ B and reports diminishing-returns violations.
    Verify(VerifyArgs),
    /// Scores every size-k subset and compares greedy against the optimum.
    Brute(BruteArgs),
    /// Writes a random stable system with unit-vector candidates.
    Randsys(RandsysArgs),
    /// Minimum-energy input steering the origin to a target state.
    Energy(EnergyArgs),
}

#[derive(Debug, Args)]
pub struct SystemArg {
    /// System JSON file, `A.csv,candidates.csv`, or `counterexample`.
    #[arg(long)]
    pub system: String,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// trace, trace-inv, trace-pinv, logdet, logprod, rank, lambda-min, nthroot-logdet, weighted-logdet
    #[arg(long, default_value = "logdet")]
    pub metric: String,
    /// Weight matrix Q (CSV rows) for weighted-logdet.
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Relative eigenvalue threshold for numerical rank.
    #[arg(long, default_value_t = 1e-10)]
    pub rank_tol: f64,
}

#[derive(Debug, Args)]
pub struct PlaceArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long)]
    pub k: usize,
    /// Build rank first, then optimize the metric.
    #[arg(long)]
    pub two_stage: bool,
    /// Use lazy evaluation (same selection, fewer evaluations).
    #[arg(long)]
    pub lazy: bool,
    /// Also report the reachable-ellipsoid volume: standard-sqrt or nth-root.
    #[arg(long)]
    pub volume_mode: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
    /// Perturbs the dynamics so the check must fail.
    #[arg(long, hide = true)]
    pub tamper: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check every triple instead of sampling (at most 12 candidates).
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BruteArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long)]
    pub k: usize,
    /// Compare against two-stage greedy.
    #[arg(long)]
    pub two_stage: bool,
    /// Score table CSV (`subset;value`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Histogram CSV of the shifted values `f − min f`.
    #[arg(long)]
    pub emit_histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct RandsysArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of unit-vector candidates, at most n (default n).
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Distance of the spectral abscissa below zero.
    #[arg(long, default_value_t = ctrlsel::lti::DEFAULT_MARGIN)]
    pub margin: f64,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    /// System JSON file; `A` need not be stable.
    #[arg(long)]
    pub system: String,
    /// Candidate ids forming B together with B0 (default: all candidates).
    #[arg(long, value_delimiter = ',')]
    pub select: Option<Vec<String>>,
    #[arg(long)]
    pub horizon: f64,
    /// Target state: JSON array or comma/whitespace separated numbers.
    #[arg(long)]
    pub target: PathBuf,
    /// Number of evenly spaced samples of u*(τ) on [0, t].
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub rank_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code for a library error.
pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Uncontrollable { .. } => exit::UNCONTROLLABLE,
        Error::SamplingExhausted { .. } => exit::SAMPLING_EXHAUSTED,
        Error::EnumerationLimit { .. } => exit::ENUMERATION_GUARD,
        e if e.is_numerical() => exit::NUMERICAL,
        _ => exit::INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Place(a) => commands::place(&a),
        Command::Counterexample(a) => commands::counterexample(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Brute(a) => commands::brute(&a),
        Command::Randsys(a) => commands::randsys(&a),
        Command::Energy(a) => commands::energy(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
