//! Pipeline commands behind the `homevenue` binary.
//!
//! Every command reads its inputs, writes its outputs plus a
//! `manifest.json` into an output directory, and returns an exit status:
//! 0 on success, 1 when some scholars failed and were logged, 2 on input
//! errors.

pub mod analyze;
pub mod archive;
pub mod cluster;
pub mod ingest_cmd;
pub mod manifest;
pub mod simulate_cmd;
pub mod stats;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use homevenue::distfit::{Family, FitMethod};

/// Version stamped into every JSON and JSONL output.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn input(path: impl AsRef<Path>, message: impl std::fmt::Display) -> Self {
        CliError::Input {
            path: path.as_ref().to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn output(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some scholars failed; see the command's `errors.jsonl`.
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "homevenue",
    version,
    about = "Home-venue detection and cohort analysis for publication records"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse DBLP-style XML and tables into a corpus archive.
    Ingest(IngestArgs),
    /// Classify every scholar, find home venues, emergence points and α series.
    Analyze(AnalyzeArgs),
    /// Cluster post-emergence α series.
    Cluster(ClusterArgs),
    /// Run the cohort statistics over an analysis.
    Stats(StatsArgs),
    /// Generate a synthetic corpus archive from a population spec.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    /// Drop scholars with fewer publications.
    #[arg(long, default_value_t = 5)]
    pub min_pubs: usize,
    /// Drop informal publications (CoRR and similar).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub exclude_informal: bool,
    /// Keep only first-authored publications.
    #[arg(long)]
    pub first_author_only: bool,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// DBLP XML files, read in the given order.
    #[arg(long = "xml", required = true)]
    pub xml: Vec<PathBuf>,
    /// `venue_id,quartile` table.
    #[arg(long)]
    pub rankings: Option<PathBuf>,
    /// `scholar_id,h_index,n_publications,first_pub_year` table.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Year academic age is measured against.
    #[arg(long, default_value_t = 2024)]
    pub reference_year: i32,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Output archive directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lsq,
    Mle,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lsq => FitMethod::LeastSquares,
            MethodArg::Mle => FitMethod::Mle,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Corpus archive directory.
    #[arg(long)]
    pub archive: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Lsq)]
    pub method: MethodArg,
    /// Heavy-tailed families to compare; the first is the home-venue candidate.
    #[arg(long, value_delimiter = ',', default_value = "pareto")]
    pub families: Vec<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KArg {
    Fixed(usize),
    Auto,
}

impl std::str::FromStr for KArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KArg::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer or `auto`, got `{s}`")),
            Ok(k) => Ok(KArg::Fixed(k)),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    /// Output directory of `analyze`.
    #[arg(long)]
    pub analysis: PathBuf,
    /// Number of clusters, or `auto` for the inertia elbow.
    #[arg(long, default_value = "auto")]
    pub k: KArg,
    /// Largest k tried by `auto`.
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standardize each series before clustering.
    #[arg(long)]
    pub z_normalize: bool,
    /// Slope threshold for stable/increasing/decreasing labels.
    #[arg(long, default_value_t = homevenue::trajectory::DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Corpus archive directory (rankings, metrics, venue types).
    #[arg(long)]
    pub archive: PathBuf,
    /// Output directory of `analyze`.
    #[arg(long)]
    pub analysis: PathBuf,
    /// Tests to run (default: all).
    #[arg(long, value_delimiter = ',', value_enum)]
    pub tests: Vec<stats::TestKind>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Population spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Ingest(args) => ingest_cmd::run(&args),
        Command::Analyze(args) => analyze::run(&args),
        Command::Cluster(args) => cluster::run(&args),
        Command::Stats(args) => stats::run(&args),
        Command::Simulate(args) => simulate_cmd::run(&args),
    }
}

pub(crate) fn parse_families(names: &[String]) -> Result<Vec<Family>, CliError> {
    let mut out = Vec::new();
    for name in names {
        let family: Family = name.parse().map_err(CliError::Usage)?;
        if !out.contains(&family) {
            out.push(family);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(
            "--families needs at least one family".into(),
        ));
    }
    Ok(out)
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

pub(crate) fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::output(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create_file(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::output(path, e.into()))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| CliError::output(path, e))
}

pub(crate) fn write_jsonl<T: Serialize>(
    path: &Path,
    rows: impl IntoIterator<Item = T>,
) -> Result<(), CliError> {
    let mut w = create_file(path)?;
    for row in rows {
        serde_json::to_writer(&mut w, &row).map_err(|e| CliError::output(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

pub(crate) fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::input(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// Mean and sample standard deviation; `None` for an empty slice.
pub(crate) fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, sd))
}
