//! `tempograph` command-line driver.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 invalid or
//! corrupt input data.

mod commands;
mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempograph::apps::SsspMode;
use tempograph::bench::ScanOrder;
use tempograph::engine::{EngineError, PatternMode};
use tempograph::model::ModelError;
use tempograph::store::{BalanceMetric, StoreError};

#[derive(Parser)]
#[command(name = "tempograph", version, about = "Time-series graph storage and iBSP analytics")]
struct Cli {
    /// Seed for generation and partitioning [default: 1].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Base directory that relative paths are resolved against.
    #[arg(long, global = true, env = "TEMPOGRAPH_ROOT", default_value = ".")]
    root: PathBuf,
    /// Report style on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// More logging (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic collection in the text format.
    Generate(GenerateArgs),
    /// Parse and validate a collection directory.
    Ingest(IngestArgs),
    /// Partition a collection and write its slices.
    Deploy(DeployArgs),
    /// Run an application over a deployment.
    Run(RunArgs),
    /// Full-scan read benchmark over a bins x packing x cache sweep.
    BenchScan(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Topology {
    Path,
    Grid,
    SmallWorld,
    Preferential,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Output collection directory.
    pub out: PathBuf,
    /// Generation spec as JSON; the topology flags are ignored.
    #[arg(long, conflicts_with = "bench")]
    pub spec: Option<PathBuf>,
    /// The default benchmark collection.
    #[arg(long)]
    pub bench: bool,
    #[arg(long, value_enum, default_value_t = Topology::SmallWorld)]
    pub topology: Topology,
    #[arg(long, default_value_t = 1000)]
    pub vertices: usize,
    /// Fail unless the topology yields exactly this many edges.
    #[arg(long)]
    pub edges: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub start: i64,
    /// Instance duration.
    #[arg(long, default_value_t = 3600)]
    pub duration: i64,
    #[arg(long)]
    pub directed: bool,
    /// Small-world ring degree.
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rewire: f64,
    #[arg(long, default_value_t = 1)]
    pub communities: usize,
    /// Grid row width [default: largest divisor up to the square root].
    #[arg(long)]
    pub width: Option<usize>,
    /// Preferential-attachment links per vertex.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
}

#[derive(Args)]
pub struct IngestArgs {
    pub collection: PathBuf,
    /// Violations listed before truncating.
    #[arg(long, default_value_t = 20)]
    pub max_violations: usize,
}

#[derive(Args)]
pub struct DeployArgs {
    pub collection: PathBuf,
    /// Deployment directory.
    #[arg(long, default_value = "deployment")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub hosts: usize,
    /// Bins per partition.
    #[arg(long, default_value_t = 4)]
    pub bins: usize,
    /// Instances packed per slice.
    #[arg(long, default_value_t = 1)]
    pub ipack: usize,
    #[arg(long, default_value = "vertices", value_parser = parse_from_str::<BalanceMetric>)]
    pub balance: BalanceMetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum App {
    Sssp,
    Pagerank,
    Nhop,
    Track,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Pattern {
    Independent,
    Eventual,
    Sequential,
}

impl From<Pattern> for PatternMode {
    fn from(p: Pattern) -> Self {
        match p {
            Pattern::Independent => PatternMode::Independent,
            Pattern::Eventual => PatternMode::EventuallyDependent,
            Pattern::Sequential => PatternMode::SequentiallyDependent,
        }
    }
}

#[derive(Args)]
pub struct RunArgs {
    pub deployment: PathBuf,
    #[arg(long, value_enum)]
    pub app: App,
    /// Timestep pattern [default: the app's own].
    #[arg(long, value_enum)]
    pub pattern: Option<Pattern>,
    /// Source vertex (sssp, nhop) or initial location (track).
    #[arg(long, value_parser = parse_vertex)]
    pub source: Option<u64>,
    #[arg(long, default_value_t = tempograph::apps::DEFAULT_HOPS)]
    pub n_hops: u32,
    /// Target whose sightings are followed (track).
    #[arg(long)]
    pub target_id: Option<String>,
    #[arg(long, default_value_t = tempograph::apps::DEFAULT_SEARCH_DEPTH)]
    pub search_depth: u32,
    #[arg(long, default_value_t = tempograph::apps::DEFAULT_ITERATIONS)]
    pub pr_iters: usize,
    #[arg(long, default_value = "running-min", value_parser = parse_from_str::<SsspMode>)]
    pub sssp_mode: SsspMode,
    /// Edge attribute holding latencies (and PageRank edge activity).
    #[arg(long, default_value = tempograph::apps::DEFAULT_LATENCY_ATTR)]
    pub latency_attr: String,
    #[arg(long, default_value = "sighting")]
    pub sighting_attr: String,
    /// Slice cache slots per host.
    #[arg(long, default_value_t = 14)]
    pub cache: usize,
    /// Worker threads per host.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Only instances overlapping [start, end).
    #[arg(long, requires = "end")]
    pub start: Option<i64>,
    #[arg(long, requires = "start")]
    pub end: Option<i64>,
    /// Result CSV [default: <app>.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-timestep stats CSV [default: <app>-stats.csv].
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Collection to scan [default: the generated benchmark collection].
    #[arg(long)]
    pub collection: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub hosts: usize,
    #[arg(long, value_delimiter = ',', default_value = "4,8")]
    pub bins: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    pub ipack: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0,14")]
    pub cache: Vec<usize>,
    #[arg(long, default_value = "bin-time", value_parser = parse_from_str::<ScanOrder>)]
    pub order: ScanOrder,
    /// Directory for the swept deployments.
    #[arg(long, default_value = "bench")]
    pub work: PathBuf,
    /// Directory for the report CSVs.
    #[arg(long, default_value = "bench-report")]
    pub out: PathBuf,
}

fn parse_from_str<T: std::str::FromStr<Err: std::fmt::Display>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: T::Err| e.to_string())
}

fn parse_vertex(s: &str) -> Result<u64, String> {
    tempograph::model::text::parse_id(s).ok_or_else(|| format!("`{s}` is not a vertex id"))
}

/// Bad argument found after parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Input that parsed but failed validation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InvalidData(pub String);

pub struct Env {
    pub seed: u64,
    pub root: PathBuf,
    pub format: Format,
}

impl Env {
    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }
}

fn store_code(e: &StoreError) -> Option<u8> {
    match e {
        StoreError::Checksum(_)
        | StoreError::Version { .. }
        | StoreError::Malformed { .. }
        | StoreError::CorruptDeployment(_)
        | StoreError::InvalidCollection(_) => Some(3),
        StoreError::Model(ModelError::Io(_)) => None,
        StoreError::Model(_) => Some(3),
        StoreError::Layout(_) | StoreError::UnknownAttribute { .. } => Some(2),
        _ => None,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if cause.is::<InvalidData>() {
            return 3;
        }
        if let Some(m) = cause.downcast_ref::<ModelError>() {
            return if matches!(m, ModelError::Io(_)) { 1 } else { 3 };
        }
        let store = match cause.downcast_ref::<EngineError>() {
            Some(EngineError::Store(s)) => Some(s),
            _ => cause.downcast_ref::<StoreError>(),
        };
        if let Some(code) = store.and_then(store_code) {
            return code;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let env = Env { seed: cli.seed.unwrap_or(1), root: cli.root, format: cli.format };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&env, &a, cli.seed),
        Command::Ingest(a) => commands::ingest(&env, &a),
        Command::Deploy(a) => commands::deploy(&env, &a),
        Command::Run(a) => commands::run(&env, &a),
        Command::BenchScan(a) => commands::bench_scan(&env, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
