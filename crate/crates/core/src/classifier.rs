//! Distances in eigenspace, the H statistic and the decision rules.
//!
//! `H = (min d_M)² / min d_E`, where both minima run over the training
//! columns of `Ω` and may land on different columns. A probe that coincides
//! with a training image (`min d_E` below a guard) gets `H = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eigenspace::{project, EigenSpace, Projection, RANK_TOLERANCE};
use crate::error::{Error, Result};
use crate::imaging::{add_gaussian_noise, GrayImage, NoiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    InBase,
    OutOfBase,
    Inconclusive,
}

impl Verdict {
    /// Process exit code for the verdict: 0 in base, 1 out of base, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::InBase => 0,
            Verdict::OutOfBase => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionMode {
    HBand,
    LegacyEuclidean,
    LegacyMahalanobis,
    LegacyEuclidEigen,
}

impl std::str::FromStr for DecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h_band" => Ok(DecisionMode::HBand),
            "legacy_euclidean" => Ok(DecisionMode::LegacyEuclidean),
            "legacy_mahalanobis" => Ok(DecisionMode::LegacyMahalanobis),
            "legacy_euclid_eigen" => Ok(DecisionMode::LegacyEuclidEigen),
            other => Err(Error::InvalidConfig(format!("unknown decision mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionConfig {
    pub mode: DecisionMode,
    /// Accept when `H ≤ h_in`.
    pub h_in: f64,
    /// Reject when `H ≥ h_out`.
    pub h_out: f64,
    /// Legacy Mahalanobis threshold factor on `λ₁₁`.
    pub alpha: f64,
    /// Legacy Euclidean threshold factor on `λ₁₁`.
    pub beta: f64,
    /// Zero-distance guard relative to `1 + max|Ω|`.
    pub epsilon_d: f64,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        Self {
            mode: DecisionMode::HBand,
            h_in: 0.5,
            h_out: 0.55,
            alpha: 1.0,
            beta: 1.0,
            epsilon_d: 1e-12,
        }
    }
}

impl DecisionConfig {
    pub fn band(h_in: f64, h_out: f64) -> Self {
        Self {
            h_in,
            h_out,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_in.is_nan() || self.h_out.is_nan() || self.h_in > self.h_out {
            return Err(Error::InvalidConfig(format!(
                "h_in {} must not exceed h_out {}",
                self.h_in, self.h_out
            )));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.epsilon_d > 0.0) {
            return Err(Error::InvalidConfig(
                "alpha, beta and epsilon_d must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Absolute distance guard for a given training matrix.
    pub fn distance_guard(&self, omega: &DMatrix<f64>) -> f64 {
        self.epsilon_d * (1.0 + omega.amax())
    }
}

/// Per-probe distances, minima, H and verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub d_e: Vec<f64>,
    pub d_m: Vec<f64>,
    pub argmin_e: usize,
    pub argmin_m: usize,
    pub h: f64,
    #[serde(rename = "theta_L")]
    pub theta_l: f64,
    pub verdict: Verdict,
    pub mode: DecisionMode,
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Eigenvalue-weighted distance `√Σ (ω_z − π_z)² / λ_z`.
///
/// Directions with `λ_z ≤ epsilon·λ₀` are left out. When the whole spectrum
/// is zero the distance is 0 for (numerically) equal vectors and an error
/// otherwise.
pub fn mahalanobis(omega_k: &[f64], pi: &[f64], eigenvalues: &[f64], epsilon: f64) -> Result<f64> {
    check_len(omega_k.len(), pi.len())?;
    check_len(omega_k.len(), eigenvalues.len())?;
    let top = eigenvalues.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        let scale = omega_k.iter().chain(pi).fold(0.0f64, |m, x| m.max(x.abs()));
        return if euclidean(omega_k, pi)? <= 1e-12 * (1.0 + scale) {
            Ok(0.0)
        } else {
            Err(Error::DegenerateSpace)
        };
    }
    let cutoff = epsilon * top;
    let sum: f64 = omega_k
        .iter()
        .zip(pi)
        .zip(eigenvalues)
        .filter(|(_, &l)| l > cutoff)
        .map(|((w, p), l)| (w - p) * (w - p) / l)
        .sum();
    Ok(sum.sqrt())
}

/// Half the largest pairwise Euclidean distance between columns of `Ω`.
pub fn theta_l(omega: &DMatrix<f64>) -> Result<f64> {
    let m = omega.ncols();
    if m < 2 {
        return Err(Error::InsufficientImages(m));
    }
    let mut largest = 0.0f64;
    for j in 0..m {
        for k in (j + 1)..m {
            largest = largest.max((omega.column(j) - omega.column(k)).norm());
        }
    }
    Ok(largest / 2.0)
}

/// Index of the smallest value; the lowest index wins ties.
pub fn argmin(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// `H = (min d_M)² / min d_E`, or 0 when `min d_E ≤ guard`.
pub fn h_value(d_e: &[f64], d_m: &[f64], guard: f64) -> f64 {
    let min_e = d_e.iter().copied().fold(f64::INFINITY, f64::min);
    let min_m = d_m.iter().copied().fold(f64::INFINITY, f64::min);
    if min_e <= guard {
        0.0
    } else {
        min_m * min_m / min_e
    }
}

/// Band rule: in base at or below `h_in`, out of base at or above `h_out`.
pub fn decide_h(h: f64, cfg: &DecisionConfig) -> Verdict {
    if h <= cfg.h_in {
        Verdict::InBase
    } else if h >= cfg.h_out {
        Verdict::OutOfBase
    } else {
        Verdict::Inconclusive
    }
}

/// Distances from a projection to every training column.
pub fn distances(space: &EigenSpace, pi: &Projection) -> Result<(Vec<f64>, Vec<f64>)> {
    let coords = pi.coords.as_slice();
    check_len(coords.len(), space.size())?;
    let eigenvalues = space.eigenvalues.as_slice();
    let mut d_e = Vec::with_capacity(space.size());
    let mut d_m = Vec::with_capacity(space.size());
    for col in space.omega.column_iter() {
        let col: DVector<f64> = col.into_owned();
        d_e.push(euclidean(col.as_slice(), coords)?);
        d_m.push(mahalanobis(col.as_slice(), coords, eigenvalues, RANK_TOLERANCE)?);
    }
    Ok((d_e, d_m))
}

/// The three threshold rules that predate H; never inconclusive.
pub fn decide_legacy(space: &EigenSpace, pi: &Projection, cfg: &DecisionConfig) -> Result<Verdict> {
    let (d_e, d_m) = distances(space, pi)?;
    let min_e = d_e.iter().copied().fold(f64::INFINITY, f64::min);
    let min_m = d_m.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda = space.largest_eigenvalue();
    let accept = match cfg.mode {
        DecisionMode::LegacyEuclidean => min_e <= theta_l(&space.omega)?,
        DecisionMode::LegacyMahalanobis => min_m <= cfg.alpha * lambda,
        DecisionMode::LegacyEuclidEigen => min_e <= cfg.beta * lambda,
        DecisionMode::HBand => {
            return Err(Error::InvalidConfig(
                "decide_legacy needs a legacy decision mode".into(),
            ))
        }
    };
    Ok(if accept {
        Verdict::InBase
    } else {
        Verdict::OutOfBase
    })
}

/// Optional noise, edge stage, projection, distances, H and verdict.
pub fn verify(
    space: &EigenSpace,
    img: &GrayImage,
    cfg: &DecisionConfig,
    noise: Option<&NoiseSpec>,
) -> Result<VerificationReport> {
    cfg.validate()?;
    let probe = match noise {
        Some(spec) => add_gaussian_noise(img, spec)?,
        None => img.clone(),
    };
    let mut pi = project(space, &probe)?;
    pi.noise = noise.copied();
    report_for_projection(space, &pi, cfg)
}

pub fn report_for_projection(
    space: &EigenSpace,
    pi: &Projection,
    cfg: &DecisionConfig,
) -> Result<VerificationReport> {
    let (d_e, d_m) = distances(space, pi)?;
    let h = h_value(&d_e, &d_m, cfg.distance_guard(&space.omega));
    let verdict = match cfg.mode {
        DecisionMode::HBand => decide_h(h, cfg),
        _ => decide_legacy(space, pi, cfg)?,
    };
    Ok(VerificationReport {
        argmin_e: argmin(&d_e).expect("space has at least two columns"),
        argmin_m: argmin(&d_m).expect("space has at least two columns"),
        theta_l: theta_l(&space.omega)?,
        d_e,
        d_m,
        h,
        verdict,
        mode: cfg.mode,
    })
}
