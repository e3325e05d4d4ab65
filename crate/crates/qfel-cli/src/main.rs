//! `qfel` — deterministic command-line front end for the quantum FEL
//! simulator.
//!
//! Subcommands: `evolve` (exact mean/variance curves for Fock, coherent,
//! or thermal seeds), `analytic` (elliptic-approximation curve plus a
//! parameter sidecar), `sweep` (saturation intensity and length against a
//! swept variable), and `design` (lab-frame feasibility report).
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numeric
//! error, 4 sweep with failed points.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qfel",
    version,
    about = "Long-time dynamics and feasibility of a high-gain quantum free-electron laser"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the ladder state exactly and write mean/variance/Fano
    /// curves over the interaction length.
    Evolve(EvolveArgs),
    /// Evaluate the closed-form mean-photon curve and its saturation
    /// parameters.
    Analytic(AnalyticArgs),
    /// Sweep electron count, detuning, or seed ratio and report numeric
    /// and analytic saturation values per point.
    Sweep(SweepArgs),
    /// Assess experimental feasibility from laboratory-frame parameters.
    Design(DesignArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SeedKind {
    Fock,
    Coherent,
    Thermal,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BackendKind {
    Spectral,
    Lanczos,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
pub struct GridArgs {
    /// Largest interaction length in gain-length units.
    #[arg(long, default_value_t = 15.0)]
    pub lmax: f64,
    /// Number of uniform samples on [0, lmax].
    #[arg(long, default_value_t = 600)]
    pub samples: usize,
}

#[derive(Args)]
pub struct EvolveArgs {
    /// Number of electrons N.
    #[arg(long)]
    pub electrons: u64,
    /// Seed statistics of the laser field.
    #[arg(long, value_enum, default_value_t = SeedKind::Fock)]
    pub seed: SeedKind,
    /// Seed mean photon number n0 (an integer for Fock seeds).
    #[arg(long, default_value_t = 0.0)]
    pub n0: f64,
    /// Quantum parameter alpha_N.
    #[arg(long)]
    pub alpha: f64,
    /// Scaled detuning delta.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Seed-distribution truncation epsilon for mixture seeds.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Propagation backend.
    #[arg(long, value_enum, default_value_t = BackendKind::Spectral)]
    pub backend: BackendKind,
    /// Cap on worker threads (falls back to QFEL_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write a provenance sidecar next to the output file.
    #[arg(long)]
    pub meta: bool,
}

#[derive(Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    pub electrons: u64,
    /// Seed photon number n0 (Fock).
    #[arg(long, default_value_t = 0)]
    pub n0: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Sidecar path for the curve parameters; defaults to `<output>.json`.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[arg(long)]
    pub meta: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SweepVariable {
    ElectronCount,
    Detuning,
    SeedRatio,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Variable to sweep.
    #[arg(long, value_enum)]
    pub var: SweepVariable,
    /// Explicit comma-separated values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          conflicts_with_all = ["range", "log_range"])]
    pub values: Option<Vec<f64>>,
    /// Linear range lo:hi:count.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "log_range")]
    pub range: Option<String>,
    /// Log-spaced range lo:hi:count.
    #[arg(long)]
    pub log_range: Option<String>,
    /// Electron count (fixed unless swept).
    #[arg(long, default_value_t = 1000)]
    pub electrons: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Fixed Fock seed (ignored when seed-ratio applies).
    #[arg(long, default_value_t = 0)]
    pub n0: u64,
    /// Seed as a fraction of N; overrides --n0 when set.
    #[arg(long)]
    pub seed_ratio: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = BackendKind::Spectral)]
    pub backend: BackendKind,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub meta: bool,
}

#[derive(Args)]
pub struct DesignArgs {
    /// JSON file with the laboratory-frame parameters (snake_case keys).
    #[arg(long)]
    pub params: PathBuf,
    /// Assumed spontaneous-rate occupancy R_sp*L.
    #[arg(long, default_value_t = 0.5)]
    pub rsp_l: f64,
    /// Assumed space-charge occupancy k_p*L.
    #[arg(long, default_value_t = 1.0)]
    pub kp_l: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Failure carrying the process exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn io(error: std::io::Error) -> Self {
        Self::new(1, format!("i/o error: {error}"))
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self::new(3, message)
    }
}

impl From<qfel_core::Error> for Failure {
    fn from(error: qfel_core::Error) -> Self {
        let code = match error {
            qfel_core::Error::Config(_) | qfel_core::Error::Domain(_) => 2,
            qfel_core::Error::Numeric(_)
            | qfel_core::Error::NoGain(_)
            | qfel_core::Error::Analysis(_) => 3,
        };
        Self::new(code, error.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(error: std::io::Error) -> Self {
        Self::io(error)
    }
}

fn thread_cap(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("QFEL_THREADS")
            .ok()
            .and_then(|value| value.parse().ok())
    })
}

/// Runs `body` inside a rayon pool capped at `cap` threads (when given).
fn with_thread_cap<T>(cap: Option<usize>, body: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match cap {
        Some(threads) if threads > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(body),
        _ => body(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evolve(args) => {
            with_thread_cap(thread_cap(args.threads), || commands::run_evolve(&args))
        }
        Command::Analytic(args) => commands::run_analytic(&args),
        Command::Sweep(args) => {
            with_thread_cap(thread_cap(args.threads), || commands::run_sweep(&args))
        }
        Command::Design(args) => commands::run_design(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("qfel: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
