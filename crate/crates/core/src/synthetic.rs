//! Seeded synthetic fingerprint-like images for tests, demos and benchmarks.
//!
//! A "finger" is a ridge pattern (cosine of a phase field around a core
//! point); each impression re-renders it with a small shift and rotation.
//! Blob images are smooth sums of Gaussians with no ridge structure.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::imaging::{FingerprintDatabase, GrayImage, ImageLabel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    Ridges,
    Blobs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct RidgeFinger {
    core: (f64, f64),
    period: f64,
    squash: f64,
    tilt: f64,
    whorl: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct BlobFinger {
    blobs: Vec<(f64, f64, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pose {
    dx: f64,
    dy: f64,
    angle: f64,
}

fn ridge_finger(rng: &mut ChaCha8Rng, h: usize, w: usize) -> RidgeFinger {
    RidgeFinger {
        core: (
            rng.random_range(0.35..0.65) * h as f64,
            rng.random_range(0.35..0.65) * w as f64,
        ),
        period: rng.random_range(4.5..7.5),
        squash: rng.random_range(0.6..1.4),
        tilt: rng.random_range(0.0..PI),
        whorl: rng.random_range(-1.0..1.0),
    }
}

fn blob_finger(rng: &mut ChaCha8Rng, h: usize, w: usize) -> BlobFinger {
    let count = rng.random_range(3..7);
    BlobFinger {
        blobs: (0..count)
            .map(|_| {
                (
                    rng.random_range(0.0..h as f64),
                    rng.random_range(0.0..w as f64),
                    rng.random_range(0.08..0.25) * h.min(w) as f64,
                    rng.random_range(-0.45..0.45),
                )
            })
            .collect(),
    }
}

fn pose(rng: &mut ChaCha8Rng, jitter: f64) -> Pose {
    Pose {
        dx: rng.random_range(-jitter..=jitter),
        dy: rng.random_range(-jitter..=jitter),
        angle: rng.random_range(-0.05..=0.05) * jitter,
    }
}

/// Maps output pixel coordinates back into the finger's frame.
fn unpose(p: &Pose, r: f64, c: f64, h: usize, w: usize) -> (f64, f64) {
    let (cy, cx) = (h as f64 / 2.0, w as f64 / 2.0);
    let (y, x) = (r - cy - p.dy, c - cx - p.dx);
    let (s, co) = p.angle.sin_cos();
    (co * y - s * x + cy, s * y + co * x + cx)
}

fn render_ridges(f: &RidgeFinger, p: &Pose, h: usize, w: usize) -> Result<GrayImage> {
    GrayImage::from_fn(h, w, |r, c| {
        let (y, x) = unpose(p, r as f64, c as f64, h, w);
        let (dy, dx) = (y - f.core.0, x - f.core.1);
        let (s, co) = f.tilt.sin_cos();
        let u = co * dx + s * dy;
        let v = -s * dx + co * dy;
        let radius = (u * u * f.squash + v * v / f.squash).sqrt();
        let phase = radius + f.whorl * f.period * v.atan2(u) / (2.0 * PI);
        0.5 + 0.4 * (2.0 * PI * phase / f.period).cos()
    })
}

fn render_blobs(f: &BlobFinger, p: &Pose, h: usize, w: usize) -> Result<GrayImage> {
    GrayImage::from_fn(h, w, |r, c| {
        let (y, x) = unpose(p, r as f64, c as f64, h, w);
        let v: f64 = f
            .blobs
            .iter()
            .map(|&(by, bx, s, a)| a * (-((y - by).powi(2) + (x - bx).powi(2)) / (2.0 * s * s)).exp())
            .sum();
        (0.5 + v).clamp(0.0, 1.0)
    })
}

/// One synthetic finger class in a generated database.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerGroup {
    pub texture: Texture,
    pub fingers: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub height: usize,
    pub width: usize,
    pub impressions: u32,
    /// Maximum impression shift in pixels (rotation scales with it).
    pub jitter: f64,
    pub groups: Vec<FingerGroup>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            height: 48,
            width: 48,
            impressions: 4,
            jitter: 1.5,
            groups: vec![FingerGroup {
                texture: Texture::Ridges,
                fingers: 10,
            }],
            seed: 1,
        }
    }
}

/// Renders every finger of every group; finger ids run from 1 in group order.
pub fn generate(cfg: &SyntheticConfig) -> Result<FingerprintDatabase> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (h, w) = (cfg.height, cfg.width);
    let mut images = Vec::new();
    let mut labels = Vec::new();
    let mut finger_id = 0u32;
    for group in &cfg.groups {
        for _ in 0..group.fingers {
            finger_id += 1;
            let ridge = ridge_finger(&mut rng, h, w);
            let blob = blob_finger(&mut rng, h, w);
            for impression in 1..=cfg.impressions {
                let p = pose(&mut rng, cfg.jitter);
                images.push(match group.texture {
                    Texture::Ridges => render_ridges(&ridge, &p, h, w)?,
                    Texture::Blobs => render_blobs(&blob, &p, h, w)?,
                });
                labels.push(ImageLabel {
                    finger: Some(finger_id),
                    impression: Some(impression),
                    path: format!("synthetic/{finger_id}_{impression}"),
                });
            }
        }
    }
    FingerprintDatabase::from_images(&images, labels)
}
