use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qgan::harness::TargetFamily;
use qgan::TrainingRatio;

use crate::config::TargetSource;

#[derive(Debug, Parser)]
#[command(
    name = "qgan",
    version,
    about = "Train quantum GANs on a statevector simulator and study how their best settings scale"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one QGAN and record its per-epoch losses and KL divergence.
    Train(TrainArgs),
    /// Train every (ratio, trial) pair of a randomized sweep.
    Sweep(SweepArgs),
    /// Fit scaling laws to best settings from sweeps at several qubit counts.
    Fit(FitArgs),
    /// Render SVG charts and a markdown summary for an artifact directory.
    Report(ReportArgs),
}

/// Adam overrides shared by `train` and `sweep`.
#[derive(Debug, Clone, Default, Args)]
pub struct OptimizerArgs {
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    /// Flat `key=value` or JSON file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub qubits: Option<usize>,
    /// `bell`, `random` (the default), or a JSON statevector file.
    #[arg(long)]
    pub target: Option<TargetSource>,
    /// How a `random` target is drawn: `distribution` or `haar`.
    #[arg(long)]
    pub targets: Option<TargetFamily>,
    /// Discriminator:generator updates per epoch, e.g. `5`, `1/8`, `3:2`.
    #[arg(long)]
    pub ratio: Option<TrainingRatio>,
    #[arg(long)]
    pub epochs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write training.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Comma-separated ratios, e.g. `1/8,1/4,1,5,25`.
    #[arg(long)]
    pub ratios: Option<String>,
    #[arg(long)]
    pub epochs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub targets: Option<TargetFamily>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// best_settings.json files from sweeps at distinct qubit counts.
    #[arg(long, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// best_settings.json of a larger sweep used to choose between families.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Directory written by `train`, `sweep` or `fit`.
    pub dir: PathBuf,
    /// Where to write the report; defaults to the artifact directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
