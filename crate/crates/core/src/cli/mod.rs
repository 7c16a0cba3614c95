//! The `ghx` command line.
//!
//! Every subcommand prints one JSON report (schema `ghx/1`) to stdout, or to
//! `--json-out`, and a one-line summary to stderr. Exit status is 0 when every
//! check passed, 2 when a check failed (a violation or a non-member), and 1
//! for usage, input and I/O errors.
//!
//! Campaign sample `i` draws everything from the stream `(seed, i)`, so a
//! campaign can be split across machines and any sample replayed alone. The
//! `GHX_THREADS` environment variable caps the worker pool; reports do not
//! depend on it.

mod commands;
mod selftest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::GhxError;
use crate::herm::{HermitianForm, MetricPencil};
use crate::json;
use crate::literal;

pub use selftest::{run_selftest, selftest_cases, SelftestCase, SelftestReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Violation records kept in a report; all violations are still counted.
pub const MAX_RECORDS: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "ghx", version, about = "Numerical verification of Hodge-index and Gårding-type inequalities for m-positive forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Membership of each matrix in a file in the cone Γ_m.
    Cone(ConeArgs),
    /// Gårding inequality for m matrices in Γ_m.
    Garding(CampaignArgs),
    /// Mixed Hodge-index theorem for α_1..α_{m−1} in Γ_m.
    Hodge(HodgeArgs),
    /// Log-concavity of the mixed sequence of a pair in Γ_m.
    Logconcavity(CampaignArgs),
    /// Hodge-index theorem on the flat torus with non-constant representatives.
    Torus(TorusArgs),
    /// Runs every pinned regression case.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Base seed; sample i draws from the stream (seed, i).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random samples in a campaign.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Complex dimension for random campaigns.
    #[arg(long)]
    pub n: Option<usize>,
    /// Degree m of the cone Γ_m.
    #[arg(long)]
    pub m: Option<usize>,
    /// Margin below which a matrix does not count as a member of Γ_m.
    #[arg(long)]
    pub tol: Option<f64>,
    /// File holding the Kähler form G (identity when omitted).
    #[arg(long, value_name = "FILE")]
    pub metric: Option<PathBuf>,
    /// Draw a fresh random metric for every campaign sample.
    #[arg(long)]
    pub random_metric: bool,
    /// JSON file supplying defaults for the flags above; a report works too.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    /// Matrix file.
    pub input: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    /// Matrix file for a single instance.
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Run a seeded random campaign instead.
    #[arg(long)]
    pub random: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct HodgeArgs {
    #[command(flatten)]
    pub campaign: CampaignArgs,
    /// Class to decompose along the primitive hyperplane.
    #[arg(long, value_name = "FILE", conflicts_with = "random")]
    pub query: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TorusArgs {
    #[command(flatten)]
    pub campaign: CampaignArgs,
    /// Grid points per real axis (a power of two, at least 4).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Amplitude of the random potential ψ.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Number of Fourier modes in ψ.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Sample index whose stream supplies ψ for a file instance.
    #[arg(long, conflicts_with = "random")]
    pub sample: Option<u64>,
    /// Export ψ, φ and the representative to STEM.bin and STEM.json.
    #[arg(long, value_name = "STEM", conflicts_with = "random")]
    pub snapshot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Print the case names and exit.
    #[arg(long)]
    pub list: bool,
    /// Deliberately break the library to check that the suite notices.
    #[arg(long, value_enum, value_name = "FAULT")]
    pub inject_fault: Option<Fault>,
    /// Also write a JSON report here.
    #[arg(long, value_name = "PATH")]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Drop the alternating signs of the polarization formula.
    PolarizationSign,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: GhxError },
    #[error(transparent)]
    Ghx(#[from] GhxError),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first) and runs the command; returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("ghx: {e}");
        return EXIT_USAGE;
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ghx: {e}");
            EXIT_USAGE
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Some(raw) = std::env::var_os("GHX_THREADS") else {
        return Ok(());
    };
    let threads = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
        .ok_or_else(|| CliError::Usage(format!("GHX_THREADS must be a positive integer, got {raw:?}")))?;
    // a second call in the same process finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn execute(command: Command) -> CliResult<i32> {
    match command {
        Command::Cone(args) => commands::cone(&args),
        Command::Garding(args) => commands::garding(&args),
        Command::Hodge(args) => commands::hodge(&args),
        Command::Logconcavity(args) => commands::logconcavity(&args),
        Command::Torus(args) => commands::torus(&args),
        Command::Selftest(args) => selftest::command(&args),
    }
}

/// Defaults read from `--config`. Unknown keys are ignored, so any report
/// can serve as the config of its own rerun.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct Config {
    seed: Option<u64>,
    samples: Option<usize>,
    n: Option<usize>,
    m: Option<usize>,
    tol: Option<f64>,
    grid: Option<usize>,
    noise: Option<f64>,
    modes: Option<usize>,
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
struct Settings {
    seed: u64,
    samples: Option<usize>,
    n: Option<usize>,
    m: Option<usize>,
    tol: f64,
    grid: Option<usize>,
    noise: Option<f64>,
    modes: Option<usize>,
    metric: Option<MetricPencil>,
    random_metric: bool,
    json_out: Option<PathBuf>,
}

pub const DEFAULT_TOL: f64 = 1e-9;

impl Settings {
    fn resolve(common: &CommonArgs) -> CliResult<Self> {
        let config = match &common.config {
            Some(path) => {
                let text = read_text(path)?;
                serde_json::from_str::<Config>(&text).map_err(|e| CliError::Input {
                    path: path.clone(),
                    source: GhxError::Parse {
                        line: e.line(),
                        column: e.column(),
                        message: e.to_string(),
                    },
                })?
            }
            None => Config::default(),
        };
        let metric = match &common.metric {
            Some(path) => {
                let g = read_matrix(path)?;
                Some(MetricPencil::new(g).map_err(|source| CliError::Input { path: path.clone(), source })?)
            }
            None => None,
        };
        if metric.is_some() && common.random_metric {
            return Err(CliError::Usage("--metric and --random-metric are exclusive".into()));
        }
        let tol = common.tol.or(config.tol).unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(CliError::Usage(format!("--tol must be finite and non-negative, got {tol}")));
        }
        Ok(Self {
            seed: common.seed.or(config.seed).unwrap_or(0),
            samples: common.samples.or(config.samples),
            n: common.n.or(config.n),
            m: common.m.or(config.m),
            tol,
            grid: config.grid,
            noise: config.noise,
            modes: config.modes,
            metric,
            random_metric: common.random_metric,
            json_out: common.json_out.clone(),
        })
    }

    /// The fixed metric of a single instance of dimension `n`.
    fn metric_for(&self, n: usize) -> CliResult<MetricPencil> {
        match &self.metric {
            Some(g) if g.dim() != n => Err(CliError::Usage(format!(
                "metric has dimension {}, inputs have dimension {n}",
                g.dim()
            ))),
            Some(g) => Ok(g.clone()),
            None => Ok(MetricPencil::identity(n)),
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        source: e.into(),
    })
}

fn read_matrices(path: &Path) -> CliResult<Vec<HermitianForm>> {
    let text = read_text(path)?;
    literal::parse_matrices(&text).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn read_matrix(path: &Path) -> CliResult<HermitianForm> {
    let text = read_text(path)?;
    literal::parse_matrix(&text).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// Top-level report: the schema tag, the command and its body.
#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn emit<T: Serialize>(command: &str, body: &T, json_out: Option<&Path>) -> CliResult<()> {
    let text = json::to_string(&Envelope {
        schema: json::SCHEMA,
        command,
        body,
    })
    .map_err(|e| GhxError::Numerical(format!("report serialization failed: {e}")))?;
    match json_out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            source: e.into(),
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
