use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpcs::{DecisionConfig, DecisionMode, EdgeConfig, EdgeMethod, NoiseLevelName, SplitPolicy};

#[derive(Debug, Parser)]
#[command(name = "fpcs", version, about = "Fingerprint membership verification in a PCA eigenspace")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stack a directory of 8-bit grayscale images into a database file.
    Ingest(IngestArgs),
    /// Build an eigenspace from a database file.
    Train(TrainArgs),
    /// Decide whether one probe image belongs to the enrolled base.
    Verify(VerifyArgs),
    /// Compute H for every probe of a split database and write a CSV.
    #[command(name = "h-scan")]
    HScan(ScanArgs),
    /// Sweep the H threshold and write ROC points as CSV.
    Roc(RocArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, default_value = "*")]
    pub pattern: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EdgeArg {
    None,
    Sobel,
    Canny,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    #[value(name = "half-fingers")]
    HalfFingers,
}

impl From<SplitArg> for SplitPolicy {
    fn from(_: SplitArg) -> Self {
        SplitPolicy::HalfFingers
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    pub edges: EdgeArg,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "high-pct")]
    pub high_pct: Option<f64>,
    #[arg(long = "low-ratio")]
    pub low_ratio: Option<f64>,
    #[arg(long = "sobel-factor")]
    pub sobel_factor: Option<f64>,
    /// Train only on the enrolled part of this split.
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
    /// Write every edge-processed training image as PGM into this directory.
    #[arg(long = "dump-edges")]
    pub dump_edges: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

impl TrainArgs {
    pub fn edge_config(&self) -> EdgeConfig {
        let method = match self.edges {
            EdgeArg::None => EdgeMethod::None,
            EdgeArg::Sobel => EdgeMethod::Sobel,
            EdgeArg::Canny => EdgeMethod::Canny,
        };
        let d = EdgeConfig::with_method(method);
        EdgeConfig {
            canny_sigma: self.sigma.unwrap_or(d.canny_sigma),
            canny_high_percentile: self.high_pct.unwrap_or(d.canny_high_percentile),
            canny_low_ratio: self.low_ratio.unwrap_or(d.canny_low_ratio),
            sobel_threshold_factor: self.sobel_factor.unwrap_or(d.sobel_threshold_factor),
            ..d
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    #[value(name = "h_band")]
    HBand,
    #[value(name = "legacy_euclidean")]
    LegacyEuclidean,
    #[value(name = "legacy_mahalanobis")]
    LegacyMahalanobis,
    #[value(name = "legacy_euclid_eigen")]
    LegacyEuclidEigen,
}

/// `m,v` pair for Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePair {
    pub mean: f64,
    pub variance: f64,
}

pub fn parse_noise_pair(s: &str) -> Result<NoisePair, String> {
    let (m, v) = s
        .split_once(',')
        .ok_or_else(|| format!("expected MEAN,VARIANCE, got {s:?}"))?;
    let mean: f64 = m.trim().parse().map_err(|_| format!("bad noise mean {m:?}"))?;
    let variance: f64 = v.trim().parse().map_err(|_| format!("bad noise variance {v:?}"))?;
    if variance < 0.0 || !mean.is_finite() || !variance.is_finite() {
        return Err(format!("noise variance must be finite and non-negative, got {v}"));
    }
    Ok(NoisePair { mean, variance })
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long = "h-in", default_value_t = 0.5)]
    pub h_in: f64,
    #[arg(long = "h-out", default_value_t = 0.55)]
    pub h_out: f64,
    #[arg(long, value_enum, default_value = "h_band")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, value_parser = parse_noise_pair)]
    pub noise: Option<NoisePair>,
    #[arg(long, default_value_t = 0, requires = "noise")]
    pub seed: u64,
}

impl VerifyArgs {
    pub fn decision_config(&self) -> DecisionConfig {
        DecisionConfig {
            mode: match self.mode {
                ModeArg::HBand => DecisionMode::HBand,
                ModeArg::LegacyEuclidean => DecisionMode::LegacyEuclidean,
                ModeArg::LegacyMahalanobis => DecisionMode::LegacyMahalanobis,
                ModeArg::LegacyEuclidEigen => DecisionMode::LegacyEuclidEigen,
            },
            h_in: self.h_in,
            h_out: self.h_out,
            alpha: self.alpha,
            beta: self.beta,
            ..DecisionConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseLevelArg {
    None,
    Low,
    Medium,
    High,
}

impl From<NoiseLevelArg> for NoiseLevelName {
    fn from(n: NoiseLevelArg) -> Self {
        match n {
            NoiseLevelArg::None => NoiseLevelName::None,
            NoiseLevelArg::Low => NoiseLevelName::Low,
            NoiseLevelArg::Medium => NoiseLevelName::Medium,
            NoiseLevelArg::High => NoiseLevelName::High,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long, value_enum, default_value = "half-fingers")]
    pub split: SplitArg,
    #[arg(long = "noise-level", value_enum, default_value = "none")]
    pub noise_level: NoiseLevelArg,
    /// Overrides the `(mean, variance)` pair of the named level.
    #[arg(long, value_parser = parse_noise_pair)]
    pub noise: Option<NoisePair>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.0)]
    pub tmin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tmax: f64,
}
