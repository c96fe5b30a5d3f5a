//! `dgft`: build directed graph Fourier bases and run experiments on them.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dgft::{ErrorClass, OptimizerConfig};

#[derive(Parser)]
#[command(name = "dgft", version, about = "Directed graph Fourier transforms with evenly spread frequencies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an orthonormal basis and write it as JSON.
    Basis(BasisArgs),
    /// Maximum directed variation of a unit-norm signal.
    Fmax(FmaxArgs),
    /// Frequency profiles of several methods on one graph, as CSV.
    Compare(CompareArgs),
    /// Monte Carlo low-pass denoising experiment, as CSV.
    Denoise(DenoiseArgs),
    /// Direct an undirected edge list from low to high coordinate.
    Orient(OrientArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, ValueEnum)]
pub enum BasisMethod {
    Feasible,
    Greedy,
    Laplacian,
    Chung,
}

impl BasisMethod {
    pub fn name(self) -> &'static str {
        match self {
            BasisMethod::Feasible => "feasible",
            BasisMethod::Greedy => "greedy",
            BasisMethod::Laplacian => "laplacian",
            BasisMethod::Chung => "chung",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum FmaxMethod {
    Feasible,
    Analytic,
    Approx,
    Bound,
}

#[derive(Args, Clone)]
pub struct SolverFlags {
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e3)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub rho1: f64,
    #[arg(long, default_value_t = 0.9)]
    pub rho2: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tau0: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverFlags {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            lambda: self.lambda,
            eps: self.eps,
            rho1: self.rho1,
            rho2: self.rho2,
            tau0: self.tau0,
            max_iters: self.max_iters,
            restarts: self.restarts,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Args)]
pub struct BasisArgs {
    #[arg(value_enum)]
    pub method: BasisMethod,
    /// Edge-list TSV (`src<TAB>dst<TAB>weight`).
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Greedy only: enumerate every sign choice instead.
    #[arg(long)]
    pub exact: bool,
    /// Feasible only: write the per-iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args)]
pub struct FmaxArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub method: FmaxMethod,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated methods.
    #[arg(long, alias = "method", value_enum, value_delimiter = ',', required = true)]
    pub methods: Vec<BasisMethod>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// `label,value` CSV of the clean signal.
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    /// Comma-separated window sizes; all of `1..=N` by default.
    #[arg(long, value_delimiter = ',')]
    pub windows: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write spectral coefficients and cumulative energy of the clean
    /// signal and of the first noisy realization to this CSV.
    #[arg(long)]
    pub emit_spectra: Option<PathBuf>,
}

#[derive(Args)]
pub struct OrientArgs {
    /// Undirected edge list, one line per edge.
    #[arg(long)]
    pub graph: PathBuf,
    /// `label,value` CSV of vertex coordinates.
    #[arg(long)]
    pub coords: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<dgft::Error>() {
        return match e.class() {
            ErrorClass::Input => 2,
            ErrorClass::Precondition => 3,
            ErrorClass::Numerical => 4,
        };
    }
    if err.downcast_ref::<io::InputError>().is_some() || err.downcast_ref::<std::io::Error>().is_some() {
        return 2;
    }
    1
}

fn init_threads() {
    if let Some(n) = std::env::var("DGFT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let result = match cli.command {
        Command::Basis(a) => commands::basis(&a),
        Command::Fmax(a) => commands::fmax(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Denoise(a) => commands::denoise(&a),
        Command::Orient(a) => commands::orient(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
