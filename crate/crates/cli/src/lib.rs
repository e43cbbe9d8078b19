//! Command-line frontend for `qcorr`.
//!
//! [`run`] parses the arguments, executes one subcommand and returns the
//! process exit code: 0 on success, 2 for invalid input, 1 for anything
//! else.

pub mod commands;
pub mod output;
pub mod records;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<qcorr::Error> for CliError {
    fn from(e: qcorr::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qcorr", version, about = "Work, correlations and passivity of small quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,

    /// Write output to this file instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for every random choice (searches, sampled unitaries)
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,

    /// Worker threads for searches and sweeps (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thermal state of a single system
    Thermal(ThermalArgs),
    /// Von Neumann entropy, optionally relative to a thermal state
    Entropy(EntropyArgs),
    /// Mutual information and conditional entropy of a bipartite state
    MutualInfo(MutualInfoArgs),
    /// Ergotropy, passivity and thermality
    Ergotropy(ErgotropyArgs),
    /// Heat exchange on an exchange-correlated two-system state
    HeatFlow(HeatFlowArgs),
    /// Split the work cost of random unitaries into entropic terms
    Decompose(DecomposeArgs),
    /// Run the cool-then-correlate protocol once
    Protocol(ProtocolArgs),
    /// Can a cooled product be correlated back to thermal marginals?
    Feasibility(FeasibilityArgs),
    /// Exact two-qubit X-state analysis
    Xstate(XStateArgs),
    /// Protocol over a grid of inverse temperatures and budgets
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Diagonal state given by its populations
    #[arg(long, value_delimiter = ',', conflicts_with = "matrix_file")]
    pub populations: Option<Vec<f64>>,

    /// JSON file with `{"re": [[..]], "im": [[..]]}` (`im` optional)
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Independent local searches
    #[arg(long, default_value_t = 20)]
    pub starts: usize,

    /// Simplex iterations per start
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
}

#[derive(Debug, Args)]
pub struct ThermalArgs {
    /// Energy levels, ascending
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub levels: Vec<f64>,

    /// Inverse temperature (`inf` for the ground state)
    #[arg(long)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Energy levels for the relative entropy to a thermal state
    #[arg(long, value_delimiter = ',', requires = "beta", allow_negative_numbers = true)]
    pub levels: Option<Vec<f64>>,

    #[arg(long, requires = "levels")]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MutualInfoArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Local dimensions `d_A,d_B`
    #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
    pub dims: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct ErgotropyArgs {
    #[command(flatten)]
    pub state: StateArgs,

    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub levels: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Levels of system A
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub levels_a: Vec<f64>,

    /// Levels of system B
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub levels_b: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct HeatFlowArgs {
    #[command(flatten)]
    pub pair: PairArgs,

    /// Inverse temperature of A's marginal
    #[arg(long)]
    pub beta_a: f64,

    /// Inverse temperature of B's marginal
    #[arg(long)]
    pub beta_b: f64,

    /// Coherence between |01> and |10> as a fraction of its positivity maximum
    #[arg(long, default_value_t = 0.9)]
    pub coherence: f64,

    /// Number of exchange-angle steps over [0, pi]
    #[arg(long, default_value_t = 1000)]
    pub angle_steps: usize,

    /// Also search the full unitary group
    #[arg(long)]
    pub search: bool,

    #[command(flatten)]
    pub budget: SearchArgs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub pair: PairArgs,

    /// Levels of the reservoir (default: trivial)
    #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
    pub levels_r: Vec<f64>,

    #[arg(long)]
    pub beta: f64,

    /// Number of Haar-random unitaries
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub pair: PairArgs,

    #[arg(long)]
    pub beta: f64,

    /// Work budget
    #[arg(long, conflicts_with = "work_fraction", required_unless_present = "work_fraction")]
    pub work: Option<f64>,

    /// Work budget as a fraction of the threshold S(tau_S(beta))/beta
    #[arg(long)]
    pub work_fraction: Option<f64>,

    #[command(flatten)]
    pub budget: SearchArgs,
}

#[derive(Debug, Args)]
pub struct FeasibilityArgs {
    #[command(flatten)]
    pub pair: PairArgs,

    /// Ambient inverse temperature
    #[arg(long)]
    pub beta: f64,

    /// Cooled inverse temperature
    #[arg(long)]
    pub beta_i: f64,

    /// Skip the numerical search
    #[arg(long)]
    pub no_search: bool,

    #[command(flatten)]
    pub budget: SearchArgs,
}

#[derive(Debug, Args)]
pub struct XStateArgs {
    /// Ground probability of the cooled A marginal (`p/q` or decimal)
    #[arg(long = "aI")]
    pub a_i: String,

    /// Ground probability of the cooled B marginal
    #[arg(long = "bI")]
    pub b_i: String,

    /// Target ground probability of A
    #[arg(long)]
    pub a: String,

    /// Target ground probability of B
    #[arg(long)]
    pub b: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WorkScale {
    /// Budgets are energies
    Absolute,
    /// Budgets are fractions of the threshold at each beta
    Threshold,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pair: PairArgs,

    /// Inverse temperatures: `x`, `x1,x2,..` or `start:stop:count`
    #[arg(long)]
    pub beta: String,

    /// Work budgets, same syntax
    #[arg(long)]
    pub work: String,

    #[arg(long, value_enum, default_value = "absolute")]
    pub work_scale: WorkScale,

    #[command(flatten)]
    pub budget: SearchArgs,
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let rendered = match cli.threads {
        Some(0) => return Err(CliError::Validation("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            pool.install(|| commands::dispatch(cli))?
        }
        None => commands::dispatch(cli)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(rendered.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
