use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glarekit::calib::AlphaPolicy;
use glarekit::deglare::CompositeMode;
use glarekit::encode::TransferFunction;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "glarekit", version, about = "Glare calibration, simulation and removal")]
pub struct Cli {
    /// Worker threads for batch processing (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Seed for scene generation and noise.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Log level on standard error.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: log::LevelFilter,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit GSF parameters from a calibration manifest.
    Calibrate(CalibrateArgs),
    /// Apply glare with a known GSF.
    Simulate(SimulateArgs),
    /// Saturation-aware glare removal.
    Deglare(DeglareArgs),
    /// Transfer function, quantisation and the encoded-domain baseline.
    Encode(EncodeArgs),
    /// Score perception outputs or images against references.
    Score(ScoreArgs),
    /// Generate a synthetic scene, its degradation and ground truth.
    Synth(SynthArgs),
    /// Merge an exposure stack into a radiance map.
    Merge(MergeArgs),
    /// Run the configured stage chain.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Calibration manifest (training scenes).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Hold-out manifest; enables the lambda sweep.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Starting parameters (JSON); defaults to p = (0.9, 0.004, 0.3, 0.9).
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Comma-separated lambda grid for the hold-out sweep.
    #[arg(long, value_delimiter = ',', default_values_t = glarekit::calib::DEFAULT_LAMBDA_GRID)]
    pub lambda_grid: Vec<f64>,
    /// Scene weighting for the hold-out sweep.
    #[arg(long, default_value = "uniform", value_parser = parse_alpha)]
    pub alpha_policy: AlphaPolicy,
    /// Simplex iteration cap per run.
    #[arg(long, default_value_t = 2000)]
    pub max_iterations: usize,
    /// Output GsfParams JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Fit report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Input image or directory (.pfm/.png).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// GsfParams JSON.
    #[arg(long)]
    pub gsf: PathBuf,
    /// Output image or directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeglareArgs {
    /// Input image or directory (.pfm/.png).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Calibrated GsfParams JSON.
    #[arg(long)]
    pub gsf: PathBuf,
    /// Output image or directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Wiener noise-to-signal ratio.
    #[arg(long, default_value_t = glarekit::deglare::DEFAULT_NSR)]
    pub nsr: f64,
    /// Saturation threshold as a fraction of the ceiling.
    #[arg(long, default_value_t = 0.98)]
    pub sat_threshold: f64,
    /// Sensor ceiling (default: image maximum).
    #[arg(long)]
    pub ceiling: Option<f64>,
    /// Gaussian blur sigma for the stray-light estimate.
    #[arg(long, default_value_t = 2.0)]
    pub dark_sigma: f64,
    /// Dark-channel window size (odd).
    #[arg(long, default_value_t = 7)]
    pub dark_patch: usize,
    /// Fraction of unsaturated pixels taken as dark.
    #[arg(long, default_value_t = 0.05)]
    pub dark_quantile: f64,
    /// Slack penalty (default: 1e-3 of the mean stray estimate).
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// What replaces the saturated pixels before deconvolution.
    #[arg(long, value_enum, default_value_t = Composite::Glared)]
    pub composite: Composite,
    /// Constraint tolerance as a fraction of the image maximum.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_fraction: f64,
    /// Report JSON (a directory in batch mode).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Composite {
    Radiance,
    Glared,
}

impl From<Composite> for CompositeMode {
    fn from(c: Composite) -> Self {
        match c {
            Composite::Radiance => CompositeMode::Radiance,
            Composite::Glared => CompositeMode::Glared,
        }
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Input linear image or directory.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output image or directory (.pfm keeps values exactly, .png stores 16 bits).
    #[arg(long)]
    pub out: PathBuf,
    /// Transfer function: gamma:G, log:N or linear:M,C.
    #[arg(long, default_value = "gamma:2.2", value_parser = parse_tf)]
    pub tf: TransferFunction,
    /// Normalisation ceiling for gamma/linear (default: image maximum).
    #[arg(long)]
    pub ceiling: Option<f64>,
    /// Quantisation depth in bits (1..=16).
    #[arg(long)]
    pub quant_bits: Option<u32>,
    /// Unsharp-mask sigma for the encoded-domain baseline.
    #[arg(long, requires = "unsharp_amount")]
    pub unsharp_sigma: Option<f64>,
    /// Unsharp-mask amount.
    #[arg(long, requires = "unsharp_sigma")]
    pub unsharp_amount: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Miou,
    Ap,
    Map,
    Mota,
    Motp,
    RmseLane,
    RmseDepth,
    LogRmse,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Miou => "miou",
            Metric::Ap => "ap",
            Metric::Map => "map",
            Metric::Mota => "mota",
            Metric::Motp => "motp",
            Metric::RmseLane => "rmse-lane",
            Metric::RmseDepth => "rmse-depth",
            Metric::LogRmse => "log-rmse",
        }
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Predictions (JSON Lines, or an image for depth/log-rmse).
    #[arg(long)]
    pub pred: PathBuf,
    /// References in the same format.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// IoU threshold for matching.
    #[arg(long, default_value_t = glarekit::metrics::DEFAULT_IOU_THRESH)]
    pub iou_thresh: f64,
    /// Validity mask image for depth (non-zero = valid).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Score report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Aggregate CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Tunnel,
    Rig,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// SceneSpec JSON.
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in scene family (scene seed = --seed).
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 128)]
    pub width: usize,
    #[arg(long, default_value_t = 128)]
    pub height: usize,
    /// GsfParams JSON for the degradation (default: canonical p = (0.9, 0.004, 0.3, 0.9)).
    #[arg(long)]
    pub gsf: Option<PathBuf>,
    /// Clipping ceiling (`inf` disables clipping).
    #[arg(long, default_value_t = 10.0)]
    pub ceiling: f64,
    /// Noise sigma as a fraction of the ceiling.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// Stack manifest JSON.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output radiance map.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Pipeline config JSON.
    #[arg(long)]
    pub config: PathBuf,
}

fn parse_tf(s: &str) -> Result<TransferFunction, String> {
    s.parse().map_err(|e: glarekit::Error| e.to_string())
}

fn parse_alpha(s: &str) -> Result<AlphaPolicy, String> {
    s.parse().map_err(|e: glarekit::Error| e.to_string())
}
