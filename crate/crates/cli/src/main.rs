//! Command-line front end: simulation, analysis, calibration, ingestion, and
//! overlap-potential export, all emitting plot-ready CSV plus a manifest that
//! reproduces the run byte-for-byte.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit code 2 for configuration and usage problems, 1 for runtime and data
/// failures, 0 on success.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<rankdrift::Error> for CliError {
    fn from(e: rankdrift::Error) -> Self {
        match e {
            rankdrift::Error::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "rankdrift",
    version,
    about = "Neutral word-rank evolution: simulate, measure, calibrate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded simulation ensemble and export trajectories and rank metrics
    Simulate(SimulateArgs),
    /// Compute the same rank metrics on an ingested lexicon
    Analyze(AnalyzeArgs),
    /// Least-squares calibration with 99% confidence intervals
    Fit(FitArgs),
    /// Filter, consolidate, and tag raw unigram shards into a lexicon CSV
    Ingest(IngestArgs),
    /// Export count envelopes and net rank-change potential across corpus sizes
    Potential(PotentialArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (one directory per run)
    #[arg(long)]
    out: PathBuf,
    /// Write into a non-empty output directory
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Corpus growth rate per step
    #[arg(long)]
    alpha: Option<f64>,
    /// Initial corpus size in tokens
    #[arg(long)]
    beta: Option<u64>,
    /// Vocabulary size
    #[arg(long)]
    vocab: Option<usize>,
    /// Zipf shape of the initial distribution
    #[arg(long = "zipf-a")]
    zipf_a: Option<f64>,
    /// Number of time steps
    #[arg(long)]
    steps: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble size
    #[arg(long)]
    replicates: Option<usize>,
    /// RBO persistence weight
    #[arg(long = "rbo-p")]
    rbo_p: Option<f64>,
    /// Lag of the second RBO curve
    #[arg(long)]
    lag: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Lexicon CSV produced by `rankdrift ingest`
    #[arg(long)]
    input: Option<PathBuf>,
    /// RBO persistence weight
    #[arg(long = "rbo-p")]
    rbo_p: Option<f64>,
    /// Lag of the second RBO curve
    #[arg(long)]
    lag: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FitMode {
    /// Exponential corpus growth: alpha and ln(beta)
    Corpus,
    /// Initial Zipf shape with mean-rank truncation
    Zipf,
    /// Turnover power law z = a y^b
    Turnover,
}

#[derive(Args)]
struct FitArgs {
    /// What to calibrate
    #[arg(value_enum)]
    mode: FitMode,
    /// Lexicon CSV, or year,total CSV for corpus fits
    #[arg(long)]
    input: Option<PathBuf>,
    /// Largest top-list size in the turnover fit grid
    #[arg(long = "y-max")]
    y_max: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct IngestArgs {
    /// Tab-separated unigram shard files (token, year, match_count, volume_count)
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Keep records appearing in at least this many volumes
    #[arg(long = "min-volumes")]
    min_volumes: Option<u64>,
    /// Year interval A:B, inclusive on both ends
    #[arg(long)]
    years: Option<String>,
    /// Stopword list, one word per line
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Swadesh list, one word per line
    #[arg(long)]
    swadesh: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PotentialArgs {
    /// Vocabulary size
    #[arg(long)]
    vocab: Option<usize>,
    /// Zipf shape
    #[arg(long = "zipf-a")]
    zipf_a: Option<f64>,
    /// Initial corpus sizes to sweep, comma separated
    #[arg(long, value_delimiter = ',')]
    betas: Vec<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Fit(args) => commands::fit(args),
        Command::Ingest(args) => commands::ingest(args),
        Command::Potential(args) => commands::potential(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
