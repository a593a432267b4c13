mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etf_core::entangle::{Factorization, IndexOrder, Mode};

#[derive(Parser, Debug)]
#[command(name = "etf", version, about = "Search, build and verify equiangular tight frames")]
pub struct Cli {
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for an ETF(d, N) signature by alternating projections.
    Solve(SolveArgs),
    /// Check a Gram, signature or synthesis matrix file.
    Verify(VerifyArgs),
    /// Run the solver over a range of N and write the existence table.
    Scan(ScanArgs),
    /// Fourier and Hadamard tensor constructions.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Roots-of-unity feasibility of ETF Gram phases.
    Roots(RootsArgs),
    /// Parametric families of signatures.
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Average purity of frame vectors across a bipartition.
    #[command(subcommand)]
    Purity(PurityCommand),
    /// Divisibility test among d, N - 1 and N - d.
    Fickus(FickusArgs),
    /// Existence chart data from a scan CSV.
    Chart(ChartArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SolverFlags {
    #[arg(long, default_value_t = 1000)]
    pub seeds: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Restrict the search to real symmetric signatures.
    #[arg(long)]
    pub real: bool,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long, default_value_t = 500)]
    pub stall_window: usize,
    #[arg(long, default_value_t = 1e-14)]
    pub stall_epsilon: f64,
    /// Residual below which the Levenberg-Marquardt polish is attempted.
    #[arg(long, default_value_t = 1e-3)]
    pub polish_threshold: f64,
    #[arg(long, default_value_t = 200)]
    pub polish_max_iters: usize,
    /// Tolerance for the final ETF verification.
    #[arg(long, default_value_t = 1e-8)]
    pub verify_tol: f64,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Directory for the signature file and manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MatrixKind {
    Gram,
    Signature,
    Synthesis,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub file: PathBuf,
    /// Interpret the file as this kind instead of detecting it.
    #[arg(long = "as", value_enum)]
    pub kind: Option<MatrixKind>,
    /// Frame dimension for a Gram matrix (default: N²/Tr G², rounded).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 3)]
    pub n_min: usize,
    #[arg(long, default_value_t = 16)]
    pub n_max: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ConstructCommand {
    /// Build a signature from an expression such as `tensor(fourier:2,hadamard:2)`.
    Build {
        expr: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All tensor products of hermitian Fourier matrices with N rows.
    Enumerate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare Haagerup sets of two matrices.
    Certify { a: PathBuf, b: PathBuf },
}

#[derive(Args, Debug)]
pub struct RootsArgs {
    #[arg(long, required_unless_present = "sic")]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 4)]
    pub m: u64,
    /// List every d evaluated, not only the compatible ones.
    #[arg(long)]
    pub all: bool,
    /// SIC dimensions up to this bound whose Gram phases can be roots of unity.
    #[arg(long)]
    pub sic: Option<u64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyName {
    U16,
}

#[derive(Subcommand, Debug)]
pub enum FamilyCommand {
    /// Evaluate the ETF(6, 16) family at six phases.
    U16 {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        alphas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the ER column pairs of a matrix, 1-based.
    Detect { file: PathBuf },
    /// Check the family invariants on random parameter samples.
    Validate {
        #[arg(long, value_enum, default_value = "u16")]
        family: FamilyName,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FactorizationArg {
    Eigen,
    Cholesky,
}

impl From<FactorizationArg> for Factorization {
    fn from(f: FactorizationArg) -> Self {
        match f {
            FactorizationArg::Eigen => Factorization::Eigen,
            FactorizationArg::Cholesky => Factorization::Cholesky,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OrderArg {
    AMajor,
    BMajor,
}

impl From<OrderArg> for IndexOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::AMajor => IndexOrder::AMajor,
            OrderArg::BMajor => IndexOrder::BMajor,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Min,
    Max,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Min => Mode::Min,
            ModeArg::Max => Mode::Max,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct FrameFlags {
    #[arg(long, value_enum, default_value = "u16")]
    pub family: FamilyName,
    #[arg(long, default_value = "2x3")]
    pub bipartition: String,
    #[arg(long, value_enum, default_value = "eigen")]
    pub factorization: FactorizationArg,
    #[arg(long, value_enum, default_value = "a-major")]
    pub order: OrderArg,
}

#[derive(Subcommand, Debug)]
pub enum PurityCommand {
    /// Average purity at one parameter vector.
    Eval {
        #[command(flatten)]
        frame: FrameFlags,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        alphas: Vec<f64>,
    },
    /// Multi-start Nelder-Mead over the family parameters.
    Optimize {
        #[command(flatten)]
        frame: FrameFlags,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        #[arg(long, default_value_t = 4000)]
        max_iters: u64,
        #[arg(long, default_value_t = 1e-10)]
        f_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct FickusArgs {
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub n: u64,
}

#[derive(Args, Debug)]
pub struct ChartArgs {
    /// CSV written by `scan`.
    pub scan_csv: PathBuf,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The computation finished but reported a negative result.
    Negative,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input: unreadable files, malformed values, invalid parameters.
    Input(String),
    Internal(String),
}

impl From<etf_core::EtfError> for CliError {
    fn from(e: etf_core::EtfError) -> Self {
        use etf_core::EtfError as E;
        match e {
            E::Optimizer(_) | E::Overflow => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    match commands::run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
