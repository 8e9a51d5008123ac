//! Command-line front end: `fit`, `gen`, `bench` and `oracle`.
//!
//! The binary is a thin wrapper around [`run`]; everything here is also
//! usable as a library so integration tests can drive commands in-process.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdas_core::Family;

pub mod bench;
pub mod fit;
pub mod gen;
pub mod oracle;
pub mod report;

#[derive(Debug, Parser)]
#[command(name = "pdas", version, about = "Best subset selection by primal-dual active sets")]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model for one subset size or choose the size.
    Fit(FitArgs),
    /// Generate a synthetic dataset and its ground truth.
    Gen(GenArgs),
    /// Monte-Carlo comparison of methods on synthetic data.
    Bench(BenchArgs),
    /// Exhaustive best subset of a fixed size (small p only).
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Binomial,
    Cox,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gaussian => Family::Gaussian,
            FamilyArg::Binomial => Family::Binomial,
            FamilyArg::Cox => Family::Cox,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    One,
    Sequential,
    Gsection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Aic,
    Bic,
    Ebic,
    Auto,
}

impl CriterionArg {
    pub fn resolve(self, n: usize, p: usize) -> pdas_core::Criterion {
        use pdas_core::Criterion;
        match self {
            CriterionArg::Aic => Criterion::Aic,
            CriterionArg::Bic => Criterion::Bic,
            CriterionArg::Ebic => Criterion::Ebic,
            CriterionArg::Auto => Criterion::auto(n, p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// How to read a dataset CSV.
#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// The file has no header row; the response is the last column (last
    /// two, time then status, for Cox).
    #[arg(long)]
    pub no_header: bool,
    /// Response column name(s); defaults to `y`, or `time,status` for Cox.
    #[arg(long, value_delimiter = ',')]
    pub response: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "sequential")]
    pub method: MethodArg,
    /// Subset size for `--method one`.
    #[arg(short)]
    pub k: Option<usize>,
    /// Largest subset size searched; defaults to min(n/2, p) for least
    /// squares and min(n/log n, p) otherwise.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub criterion: CriterionArg,
    /// Elbow threshold for `--method gsection`.
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    /// Early stop of the sequential sweep on small relative loss gains; 0 disables.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// PDAS iteration cap.
    #[arg(long, default_value_t = pdas_core::pdas::DEFAULT_MAX_ITER)]
    pub m_max: usize,
    /// Start `--method one` from a random subset drawn from `--seed`
    /// instead of the largest sacrifices at the zero model.
    #[arg(long)]
    pub random_init: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Diagonal Newton steps for Cox fits.
    #[arg(long)]
    pub diagonal_hessian: bool,
    /// Report every coefficient, not only the nonzero ones.
    #[arg(long)]
    pub dense: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the sequential path table (k, loss, criteria) as CSV.
    #[arg(long)]
    pub path_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(short, long)]
    pub n: usize,
    #[arg(short, long)]
    pub p: usize,
    /// Number of nonzero coefficients.
    #[arg(short, long, default_value_t = 0)]
    pub q: usize,
    #[command(flatten)]
    pub design: DesignArgs,
    /// Explicit coefficient vector, comma separated; overrides q, b and B.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Data CSV destination.
    #[arg(long)]
    pub output: PathBuf,
    /// Ground-truth JSON destination; defaults to the output path with a
    /// `.json` extension.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub no_header: bool,
}

/// Simulation design knobs shared by `gen` and `bench`.
#[derive(Clone, Debug, Args)]
pub struct DesignArgs {
    /// Neighbour weight in the design mixture.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Noise standard deviation (gaussian).
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Smallest nonzero magnitude; family default when absent.
    #[arg(long)]
    pub b: Option<f64>,
    /// Largest nonzero magnitude; 100 b when absent.
    #[arg(long)]
    pub big_b: Option<f64>,
    /// Target censoring fraction (cox).
    #[arg(long)]
    pub censor_rate: Option<f64>,
    /// Draw all nonzero coefficients positive.
    #[arg(long)]
    pub positive: bool,
}

impl DesignArgs {
    pub fn config(&self, family: Family, n: usize, p: usize, q: usize, seed: u64) -> pdas_core::datagen::GenConfig {
        use pdas_core::datagen::{default_b, GenConfig, SignMode};
        let mut cfg = GenConfig::new(family, n, p, q, seed);
        cfg.rho = self.rho;
        cfg.sigma = self.sigma;
        cfg.b = self.b.unwrap_or_else(|| default_b(family, self.sigma, n, p));
        cfg.big_b = self.big_b.unwrap_or(100.0 * cfg.b);
        if let Some(c) = self.censor_rate {
            cfg.censor_rate = c;
        }
        if self.positive {
            cfg.signs = SignMode::Positive;
        }
        cfg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum BenchMethod {
    One,
    Spdas,
    Gpdas,
    Oracle,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::One => "one",
            BenchMethod::Spdas => "spdas",
            BenchMethod::Gpdas => "gpdas",
            BenchMethod::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(short, long)]
    pub n: usize,
    #[arg(short, long)]
    pub p: usize,
    #[arg(short, long)]
    pub q: usize,
    #[command(flatten)]
    pub design: DesignArgs,
    /// Replications.
    #[arg(short = 'r', long, default_value_t = 10)]
    pub reps: usize,
    /// Methods to compare. `one` fits the true size q; `oracle` searches
    /// all size-q subsets and also records, per replication, the oracle
    /// loss at every other method's chosen size.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "spdas,gpdas")]
    pub methods: Vec<BenchMethod>,
    #[arg(long, value_enum, default_value = "auto")]
    pub criterion: CriterionArg,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Held-out rows per replication.
    #[arg(long, default_value_t = 1000)]
    pub test_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run replications one after another instead of in parallel.
    #[arg(long)]
    pub serial: bool,
    /// Leave wall-clock columns out so output is reproducible byte for byte.
    #[arg(long)]
    pub omit_time: bool,
    /// Summary table destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-replication rows as CSV.
    #[arg(long)]
    pub replications: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(short)]
    pub k: usize,
    /// Refuse designs wider than this.
    #[arg(long, default_value_t = pdas_core::oracle::DEFAULT_P_CAP)]
    pub p_cap: usize,
    #[arg(long)]
    pub serial: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A failure with a stable short tag, printed as `error: <kind>: <message>`.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("config", message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Keep it to one line whatever the source message contains.
        write!(f, "{}: {}", self.kind, self.message.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

impl From<pdas_core::Error> for CliError {
    fn from(e: pdas_core::Error) -> Self {
        match e {
            // The tag already says what the prefix would.
            pdas_core::Error::InvalidArgument(m) => CliError::new("invalid-argument", m),
            e => CliError::new(e.kind(), e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("json", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("csv", e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => fit::run(&args),
        Command::Gen(args) => gen::run(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Oracle(args) => oracle::run(&args),
    }
}

/// Writes `bytes` to `path`, or to stdout when there is no path. Callers
/// render the whole document first so a failed run leaves nothing partial
/// behind on stdout.
pub(crate) fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::new("io", format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::new("io", format!("stdout: {e}")))
        }
    }
}
