//! Command-line front end for the `tunepriv` accountant, auditor and exact
//! tightness checks.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod error;
pub mod format;
pub mod spec;

pub use error::CliError;
use format::Format;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "TUNEPRIV_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "tunepriv",
    version,
    about = "Privacy accounting and auditing for private hyper-parameter tuning"
)]
pub struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for simulations (0 = one per logical core).
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper bound on ε for releasing the best of a random number of runs.
    Accountant(AccountantArgs),
    /// Table of both upper bounds (and optionally the audit) over a grid.
    Compare(CompareArgs),
    /// Empirical lower bound from the simulated distinguishing game.
    Audit(AuditArgs),
    /// Exact three-symbol tightness construction.
    Tightness(TightnessArgs),
    /// Randomised check that tied scores never increase Rényi divergence.
    Theorem4(Theorem4Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fdp,
    Rdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Conversion {
    Classic,
    Improved,
}

impl From<Conversion> for tunepriv::rdp::RdpConversion {
    fn from(c: Conversion) -> Self {
        match c {
            Conversion::Classic => Self::Classic,
            Conversion::Improved => Self::Improved,
        }
    }
}

#[derive(Debug, Args)]
pub struct AccountantArgs {
    /// gdp:mu=<r> | epsdelta:eps=<r>,delta=<r> | dpsgd:sigma=<r>,tau=<r>,n=<int>
    #[arg(long)]
    pub base: String,
    /// pointmass:k=<int> | tnb:eta=<r>,nu=<r> | geometric:nu=<r>
    #[arg(long)]
    pub xi: String,
    #[arg(long)]
    pub delta_h: f64,
    #[arg(long, value_enum, default_value_t = Method::Fdp)]
    pub method: Method,
    /// RDP to (ε, δ) conversion for `--method rdp`.
    #[arg(long, value_enum, default_value_t = Conversion::Improved)]
    pub conversion: Conversion,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Base budgets ε_B; σ is calibrated to (ε_B, δ_B) by the RDP accountant.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_b: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
    pub tau: Vec<f64>,
    /// Run-count distributions, one column each (repeatable).
    #[arg(long)]
    pub xi: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub delta_h: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub delta_b: f64,
    /// Also run the audit with this many trials per cell.
    #[arg(long)]
    pub audit_trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// DP-SGD base, dpsgd:sigma=<r>,tau=<r>,n=<int>; alternatively give --eps-b.
    #[arg(long, conflicts_with = "eps_b")]
    pub base: Option<String>,
    /// Calibrate σ so the simulated Gaussian curve is (ε_B, δ)-DP.
    #[arg(long)]
    pub eps_b: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    #[arg(long)]
    pub xi: String,
    #[arg(long, default_value_t = tunepriv::audit::DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = tunepriv::audit::DEFAULT_DELTA)]
    pub delta: f64,
    /// One-sided Clopper–Pearson level.
    #[arg(long, default_value_t = tunepriv::audit::DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    #[arg(long, default_value_t = tunepriv::audit::DEFAULT_THRESHOLDS)]
    pub thresholds: usize,
    /// Also write the per-threshold CSV here.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Pure,
    Approx,
}

#[derive(Debug, Args)]
pub struct TightnessArgs {
    #[arg(value_enum)]
    pub which: Which,
    #[arg(long, default_value_t = 1e-3)]
    pub b: f64,
    #[arg(long, default_value_t = 100.0)]
    pub d: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value = "tnb:eta=1,nu=1e-3")]
    pub xi: String,
    #[arg(long, default_value_t = 1e-5)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct Theorem4Args {
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    if cli.threads > 0 {
        // a second initialisation (tests in one process) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Accountant(a) => commands::accountant(a, cli.format.unwrap_or(Format::Text), out),
        Command::Compare(a) => commands::compare(a, cli.format.unwrap_or(Format::Csv), out),
        Command::Audit(a) => commands::audit(a, cli.format.unwrap_or(Format::Json), out),
        Command::Tightness(a) => commands::tightness(a, cli.format.unwrap_or(Format::Text), out),
        Command::Theorem4(a) => commands::theorem4(a, cli.format.unwrap_or(Format::Text), out),
    }
}
