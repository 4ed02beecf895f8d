//! `dalr`: activation statistics, layer compression, evaluation and joint
//! rank search over networks stored as `DMAT` files plus a JSON manifest.
//!
//! Activation files hold `X` as neurons x samples: one column per sample.

mod compress;
mod evaluate;
mod search;
mod stats;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use util::Failure;

#[derive(Parser)]
#[command(name = "dalr", version, about = "Low-rank compression of fully connected layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-neuron activation rates and the half-mass summary.
    Stats(StatsArgs),
    /// Compress one layer and write the updated network.
    Compress(CompressArgs),
    /// Accuracy and output error of a network on a batch.
    Evaluate(EvaluateArgs),
    /// Greedy joint rank search over two layers.
    Search(SearchArgs),
    /// Write the batch feeding one layer, for use with --acts.
    Extract(ExtractArgs),
}

#[derive(clap::Args)]
pub struct StatsArgs {
    /// Activation batch (neurons x samples).
    #[arg(long)]
    acts: PathBuf,
    /// Second batch over the same neurons; reports the concentration shift.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Rate CSV for --acts.
    #[arg(long)]
    out: PathBuf,
    /// Ranked rates of both batches side by side (needs --compare).
    #[arg(long, requires = "compare")]
    skew_out: Option<PathBuf>,
    /// Entries strictly above this count as active.
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// Columns read per block.
    #[arg(long, default_value_t = 4096)]
    block: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Svd,
    SvdBc,
    Dalr,
    PruneMean,
    PruneMax,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Svd => "svd",
            MethodArg::SvdBc => "svd-bc",
            MethodArg::Dalr => "dalr",
            MethodArg::PruneMean => "prune-mean",
            MethodArg::PruneMax => "prune-max",
        }
    }
}

#[derive(clap::Args)]
pub struct CompressArgs {
    /// Network manifest.
    #[arg(long)]
    net: PathBuf,
    /// Index of the layer to compress.
    #[arg(long)]
    layer: usize,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Target rank; pruning keeps as many units as match its weight count.
    #[arg(long)]
    rank: usize,
    /// Ridge strength for dalr; defaults to 1e-3 * trace(X X^T) / n.
    #[arg(long)]
    lambda: Option<f64>,
    /// Batch feeding the layer (neurons x samples).
    #[arg(long)]
    acts: Option<PathBuf>,
    /// Held-out network inputs for the output error and accuracies.
    #[arg(long)]
    eval_inputs: Option<PathBuf>,
    /// Labels for --eval-inputs, one per line.
    #[arg(long, requires = "eval_inputs")]
    eval_labels: Option<PathBuf>,
    /// Columns read per block when streaming --acts.
    #[arg(long, default_value_t = 4096)]
    block: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    net: PathBuf,
    /// Network inputs (features x samples).
    #[arg(long)]
    inputs: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Network whose outputs the error is measured against.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StopRuleArg {
    Baseline,
    Previous,
}

#[derive(clap::Args)]
pub struct SearchArgs {
    #[arg(long)]
    net: PathBuf,
    /// The two layers, as `I,J`.
    #[arg(long, value_delimiter = ',', required = true)]
    layers: Vec<usize>,
    #[arg(long)]
    val_inputs: PathBuf,
    #[arg(long)]
    val_labels: PathBuf,
    /// Directory holding `layer{I}.dmat` and `layer{J}.dmat`.
    #[arg(long)]
    acts_dir: PathBuf,
    /// Descending ranks, e.g. `512,256,128`; `A/B` gives each layer its own.
    #[arg(long)]
    schedule: String,
    #[arg(long, default_value_t = 0.01)]
    max_drop: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Dalr)]
    method: MethodArg,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = StopRuleArg::Baseline)]
    stop_rule: StopRuleArg,
    /// Network inputs to re-extract the downstream layer's batch from the
    /// partially compressed network.
    #[arg(long)]
    reextract_inputs: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct ExtractArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    inputs: PathBuf,
    #[arg(long)]
    layer: usize,
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Stats(a) => stats::run(&a),
        Command::Compress(a) => compress::run(&a),
        Command::Evaluate(a) => evaluate::run(&a),
        Command::Search(a) => search::run(&a),
        Command::Extract(a) => evaluate::extract(&a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on malformed arguments
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
