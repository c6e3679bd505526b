//! Threshold calibration: database split, H-scans and ROC sweeps.

use std::collections::BTreeSet;
use std::fmt::Write as _;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{report_for_projection, DecisionConfig, Verdict};
use crate::eigenspace::{project, EigenSpace};
use crate::error::{Error, Result};
use crate::imaging::{add_gaussian_noise, FingerprintDatabase, GrayImage, NoiseSpec, NOISE_GENERATOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truth {
    InBase,
    OutOfBase,
}

impl Truth {
    pub fn name(self) -> &'static str {
        match self {
            Truth::InBase => "in",
            Truth::OutOfBase => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestEntry {
    pub image: GrayImage,
    pub truth: Truth,
    pub finger: Option<u32>,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTestSet {
    pub entries: Vec<TestEntry>,
    pub policy: String,
}

impl LabeledTestSet {
    pub fn has_both_classes(&self) -> bool {
        let has = |t| self.entries.iter().any(|e| e.truth == t);
        has(Truth::InBase) && has(Truth::OutOfBase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitPolicy {
    /// The lower half of the sorted finger ids (all impressions) is enrolled,
    /// the upper half is kept out.
    HalfFingers,
}

impl SplitPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SplitPolicy::HalfFingers => "half-fingers",
        }
    }
}

impl std::str::FromStr for SplitPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half-fingers" => Ok(SplitPolicy::HalfFingers),
            other => Err(Error::InvalidConfig(format!("unknown split policy {other:?}"))),
        }
    }
}

/// Splits into an enrolled training base and a test set holding every image:
/// the training images labeled in-base, then the held-out images labeled out-of-base.
pub fn split_database(
    db: &FingerprintDatabase,
    policy: SplitPolicy,
) -> Result<(FingerprintDatabase, LabeledTestSet)> {
    let mut fingers = BTreeSet::new();
    for label in db.labels() {
        match label.finger {
            Some(f) => {
                fingers.insert(f);
            }
            None => return Err(Error::MissingLabel(label.path.clone())),
        }
    }
    if fingers.len() < 2 {
        return Err(Error::TooFewFingers(fingers.len()));
    }
    let enrolled: BTreeSet<u32> = match policy {
        SplitPolicy::HalfFingers => fingers.iter().take(fingers.len() / 2).copied().collect(),
    };
    let (train_cols, out_cols): (Vec<usize>, Vec<usize>) = (0..db.len())
        .partition(|&m| enrolled.contains(&db.labels()[m].finger.expect("checked above")));
    let train = db.select(&train_cols)?;

    let entry = |m: usize, truth| TestEntry {
        image: db.image(m),
        truth,
        finger: db.labels()[m].finger,
        path: db.labels()[m].path.clone(),
    };
    let entries = train_cols
        .iter()
        .map(|&m| entry(m, Truth::InBase))
        .chain(out_cols.iter().map(|&m| entry(m, Truth::OutOfBase)))
        .collect();
    Ok((
        train,
        LabeledTestSet {
            entries,
            policy: policy.name().to_owned(),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseLevelName {
    None,
    Low,
    Medium,
    High,
}

impl NoiseLevelName {
    pub fn name(self) -> &'static str {
        match self {
            NoiseLevelName::None => "none",
            NoiseLevelName::Low => "low",
            NoiseLevelName::Medium => "medium",
            NoiseLevelName::High => "high",
        }
    }

    /// Default `(mean, variance)` pair for the level.
    pub fn default_pair(self) -> (f64, f64) {
        match self {
            NoiseLevelName::None => (0.0, 0.0),
            NoiseLevelName::Low => (0.0, 0.001),
            NoiseLevelName::Medium => (0.0, 0.01),
            NoiseLevelName::High => (0.01, 0.1),
        }
    }
}

impl std::str::FromStr for NoiseLevelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseLevelName::None),
            "low" => Ok(NoiseLevelName::Low),
            "medium" => Ok(NoiseLevelName::Medium),
            "high" => Ok(NoiseLevelName::High),
            other => Err(Error::InvalidConfig(format!("unknown noise level {other:?}"))),
        }
    }
}

/// A named noise level; `spec.seed` is the base seed, probe `n` uses `seed + n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub name: NoiseLevelName,
    pub spec: NoiseSpec,
}

impl NoiseLevel {
    pub fn standard(name: NoiseLevelName, seed: u64) -> Self {
        let (mean, variance) = name.default_pair();
        Self {
            name,
            spec: NoiseSpec {
                mean,
                variance,
                seed,
            },
        }
    }

    pub fn probe_spec(&self, index: usize) -> NoiseSpec {
        self.spec.with_seed(self.spec.seed.wrapping_add(index as u64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HScanRow {
    pub index: usize,
    pub truth: Truth,
    pub h: f64,
    pub path: String,
}

fn probe_h(space: &EigenSpace, entry: &TestEntry, spec: &NoiseSpec) -> Result<f64> {
    let probe = if spec.is_zero() {
        entry.image.clone()
    } else {
        add_gaussian_noise(&entry.image, spec)?
    };
    let pi = project(space, &probe)?;
    Ok(report_for_projection(space, &pi, &DecisionConfig::default())?.h)
}

/// H for every test entry, in input order.
pub fn h_scan(space: &EigenSpace, tests: &LabeledTestSet, noise: &NoiseLevel) -> Result<Vec<HScanRow>> {
    let eval = |(index, entry): (usize, &TestEntry)| -> Result<HScanRow> {
        Ok(HScanRow {
            index,
            truth: entry.truth,
            h: probe_h(space, entry, &noise.probe_spec(index))?,
            path: entry.path.clone(),
        })
    };
    #[cfg(feature = "parallel")]
    {
        tests.entries.par_iter().enumerate().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        tests.entries.iter().enumerate().map(eval).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub fp: usize,
    pub fn_: usize,
    pub tp: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.fp + self.fn_ + self.tp + self.tn
    }

    pub fn fn_rate(&self) -> f64 {
        ratio(self.fn_, self.fn_ + self.tp)
    }

    pub fn fp_rate(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Tallies binary verdicts against ground truth.
pub fn confusion_counts(rows: &[(Verdict, Truth)]) -> Result<Confusion> {
    let mut c = Confusion::default();
    for &(verdict, truth) in rows {
        match (verdict, truth) {
            (Verdict::Inconclusive, _) => return Err(Error::InconclusiveVerdict),
            (Verdict::InBase, Truth::InBase) => c.tp += 1,
            (Verdict::InBase, Truth::OutOfBase) => c.fp += 1,
            (Verdict::OutOfBase, Truth::InBase) => c.fn_ += 1,
            (Verdict::OutOfBase, Truth::OutOfBase) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fn_rate: f64,
    pub fp_rate: f64,
    pub counts: Confusion,
}

/// `steps` evenly spaced thresholds from `tmin` to `tmax` inclusive.
pub fn threshold_grid(tmin: f64, tmax: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || tmin.is_nan() || tmax.is_nan() || tmin > tmax {
        return Err(Error::InvalidConfig(format!(
            "threshold grid needs steps ≥ 1 and tmin ≤ tmax (got {steps}, {tmin}, {tmax})"
        )));
    }
    if steps == 1 {
        return Ok(vec![tmin]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                tmax
            } else {
                tmin + (tmax - tmin) * i as f64 / last
            }
        })
        .collect())
}

/// ROC points from precomputed H values with the rule "in base iff H ≤ t".
pub fn roc_from_scan(rows: &[HScanRow], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    if thresholds.is_empty() || thresholds.windows(2).any(|w| w[0].is_nan() || w[1].is_nan() || w[0] > w[1]) {
        return Err(Error::InvalidConfig("thresholds must be nonempty and ascending".into()));
    }
    let has = |t| rows.iter().any(|r| r.truth == t);
    if !(has(Truth::InBase) && has(Truth::OutOfBase)) {
        return Err(Error::MissingClass);
    }
    thresholds
        .iter()
        .map(|&t| {
            let verdicts: Vec<(Verdict, Truth)> = rows
                .iter()
                .map(|r| {
                    let v = if r.h <= t { Verdict::InBase } else { Verdict::OutOfBase };
                    (v, r.truth)
                })
                .collect();
            let counts = confusion_counts(&verdicts)?;
            Ok(RocPoint {
                threshold: t,
                fn_rate: counts.fn_rate(),
                fp_rate: counts.fp_rate(),
                counts,
            })
        })
        .collect()
}

/// One H per probe (noise drawn once), then every threshold.
pub fn roc_sweep(
    space: &EigenSpace,
    tests: &LabeledTestSet,
    noise: &NoiseLevel,
    thresholds: &[f64],
) -> Result<Vec<RocPoint>> {
    if !tests.has_both_classes() {
        return Err(Error::MissingClass);
    }
    let rows = h_scan(space, tests, noise)?;
    roc_from_scan(&rows, thresholds)
}

/// Provenance written as `#` lines ahead of every CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub noise: NoiseLevel,
    pub space: String,
    pub database: String,
    pub split: String,
}

impl RunMetadata {
    fn write_header(&self, space: &EigenSpace, out: &mut String) {
        let n = &self.noise;
        let e = &space.edge_config;
        let _ = writeln!(
            out,
            "# noise_level={} mean={} variance={} seed={}",
            n.name.name(),
            n.spec.mean,
            n.spec.variance,
            n.spec.seed
        );
        let _ = writeln!(out, "# noise_levels=none:0,0 low:0,0.001 medium:0,0.01 high:0.01,0.1 (defaults)");
        let _ = writeln!(out, "# rng={NOISE_GENERATOR}; probe seed = base seed + index");
        let _ = writeln!(
            out,
            "# edges={} sigma={} high_pct={} low_ratio={} sobel_factor={}",
            e.method.name(),
            e.canny_sigma,
            e.canny_high_percentile,
            e.canny_low_ratio,
            e.sobel_threshold_factor
        );
        let _ = writeln!(
            out,
            "# space={} dims={}x{} m={} database={} split={}",
            self.space,
            space.height,
            space.width,
            space.size(),
            self.database,
            self.split
        );
        let _ = writeln!(out, "# tool=fpcs {}", env!("CARGO_PKG_VERSION"));
    }
}

pub fn h_scan_csv(rows: &[HScanRow], space: &EigenSpace, meta: &RunMetadata) -> String {
    let mut out = String::new();
    meta.write_header(space, &mut out);
    out.push_str("index,truth,h,path\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.index, r.truth.name(), r.h, csv_field(&r.path));
    }
    out
}

pub fn roc_csv(points: &[RocPoint], space: &EigenSpace, meta: &RunMetadata) -> String {
    let mut out = String::new();
    meta.write_header(space, &mut out);
    out.push_str("threshold,fn_rate,fp_rate,fp,fn,tp,tn\n");
    for p in points {
        let c = &p.counts;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.threshold, p.fn_rate, p.fp_rate, c.fp, c.fn_, c.tp, c.tn
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
