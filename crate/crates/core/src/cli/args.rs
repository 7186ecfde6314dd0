//! Command-line grammar for `mbk`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mbk",
    version,
    about = "Mini-batch k-means with early stopping"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run trials (and optional sweep axes); write traces and metrics.csv.
    Run(RunArgs),
    /// Same as `run`, but at least one sweep axis is required.
    Sweep(RunArgs),
    /// Audit saved traces and/or batch-cost concentration.
    Audit(AuditArgs),
    /// Generate a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Compare exhaustive optimum with k-means++ cost on a tiny instance.
    #[command(hide = true)]
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file, one point per line.
    #[arg(long, conflicts_with = "gen")]
    pub data: Option<PathBuf>,
    /// Generator spec, e.g. `mixture:n=10000,d=4,components=5,sigma=0.05,seed=1`.
    #[arg(long)]
    pub gen: Option<String>,
    /// Min-max scale each coordinate into [0,1].
    #[arg(long)]
    pub normalize: bool,
    /// Skip the first CSV line.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// `key = value` file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub k: Option<usize>,
    /// Batch size; omitted means the recommended size for each (k, eps).
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// `paper`, `sklearn`, or `const:<c>`.
    #[arg(long)]
    pub rate: Option<String>,
    /// `improve` or `move`.
    #[arg(long)]
    pub stop: Option<String>,
    /// `kmeanspp` or `random`.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub cap: Option<u64>,
    /// Record f_X after every iteration.
    #[arg(long)]
    pub audit_global: bool,
    /// Record distances to the full-data update.
    #[arg(long)]
    pub audit_proximity: bool,
    /// Use the whole dataset as every batch.
    #[arg(long)]
    pub full_batch: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_b: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_eps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_k: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    /// Trace JSON files.
    pub traces: Vec<PathBuf>,
    /// Subset of `progress,proximity,implication`; default is every check
    /// the traces have data for.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Threshold override; default is each trace's stopping threshold.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Also run the batch-cost concentration test on `--data`/`--gen`.
    #[arg(long)]
    pub concentration: bool,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 500)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "audit_report.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Generator spec, e.g. `uniform:n=1000,d=3,seed=2`.
    #[arg(long)]
    pub gen: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub gen: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub seeds: u64,
}
