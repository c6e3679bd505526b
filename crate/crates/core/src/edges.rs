//! Sobel and Canny edge detection producing binary edge maps.
//!
//! All convolutions use replicate padding. Gradients are correlations with
//! the standard Sobel kernels, so `gx` is positive where intensity grows to
//! the right and `gy` is positive where it grows downward.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMethod {
    None,
    Sobel,
    Canny,
}

impl EdgeMethod {
    pub fn code(self) -> u8 {
        match self {
            EdgeMethod::None => 0,
            EdgeMethod::Sobel => 1,
            EdgeMethod::Canny => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(EdgeMethod::None),
            1 => Some(EdgeMethod::Sobel),
            2 => Some(EdgeMethod::Canny),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeMethod::None => "none",
            EdgeMethod::Sobel => "sobel",
            EdgeMethod::Canny => "canny",
        }
    }
}

impl std::str::FromStr for EdgeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(EdgeMethod::None),
            "sobel" => Ok(EdgeMethod::Sobel),
            "canny" => Ok(EdgeMethod::Canny),
            other => Err(Error::InvalidConfig(format!("unknown edge method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub method: EdgeMethod,
    /// Gaussian smoothing standard deviation, in pixels.
    pub canny_sigma: f64,
    /// Percentile (0, 100) of the nonzero gradient magnitudes used as the strong threshold.
    pub canny_high_percentile: f64,
    /// Weak threshold as a fraction of the strong one.
    pub canny_low_ratio: f64,
    /// Sobel threshold as a multiple of the mean gradient magnitude.
    pub sobel_threshold_factor: f64,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        Self {
            method: EdgeMethod::None,
            canny_sigma: std::f64::consts::SQRT_2,
            canny_high_percentile: 70.0,
            canny_low_ratio: 0.4,
            sobel_threshold_factor: 2.0,
        }
    }
}

impl EdgeConfig {
    pub fn with_method(method: EdgeMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if !(self.canny_sigma > 0.0 && self.canny_sigma.is_finite()) {
            return bad("canny sigma must be positive");
        }
        if !(self.canny_high_percentile > 0.0 && self.canny_high_percentile < 100.0) {
            return bad("canny high percentile must lie in (0, 100)");
        }
        if !(self.canny_low_ratio > 0.0 && self.canny_low_ratio < 1.0) {
            return bad("canny low ratio must lie in (0, 1)");
        }
        if !(self.sobel_threshold_factor > 0.0 && self.sobel_threshold_factor.is_finite()) {
            return bad("sobel threshold factor must be positive");
        }
        Ok(())
    }

    /// Radius of the truncated Gaussian kernel, `⌈3σ⌉`.
    pub fn smoothing_radius(&self) -> usize {
        (3.0 * self.canny_sigma).ceil() as usize
    }
}

/// A real-valued grid with the dimensions of its source image.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Value with coordinates clamped into the grid.
    fn clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.values[r * self.width + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub gx: Grid,
    pub gy: Grid,
    pub magnitude: Grid,
}

/// Binary edge map: every pixel is 0.0 or 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
}

impl EdgeMap {
    fn from_mask(height: usize, width: usize, mask: impl IntoIterator<Item = bool>) -> Self {
        Self {
            height,
            width,
            pixels: mask.into_iter().map(|on| if on { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 1.0).count()
    }

    pub fn into_image(self) -> GrayImage {
        GrayImage::new(self.height, self.width, self.pixels).expect("edge maps are binary")
    }
}

pub const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
pub const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

fn check_min_size(height: usize, width: usize, min: usize) -> Result<()> {
    if height < min || width < min {
        return Err(Error::ImageTooSmall { height, width, min });
    }
    Ok(())
}

fn sobel_on_grid(src: &Grid) -> Gradients {
    let (h, w) = (src.height, src.width);
    let mut gx = vec![0.0; h * w];
    let mut gy = vec![0.0; h * w];
    let mut magnitude = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let p = |dr: isize, dc: isize| src.clamped(r as isize + dr, c as isize + dc);
            // kernel taps paired as differences so flat regions give exact zeros
            let sx = (p(-1, 1) - p(-1, -1)) + 2.0 * (p(0, 1) - p(0, -1)) + (p(1, 1) - p(1, -1));
            let sy = (p(1, -1) - p(-1, -1)) + 2.0 * (p(1, 0) - p(-1, 0)) + (p(1, 1) - p(-1, 1));
            let i = r * w + c;
            gx[i] = sx;
            gy[i] = sy;
            magnitude[i] = (sx * sx + sy * sy).sqrt();
        }
    }
    let grid = |values| Grid {
        height: h,
        width: w,
        values,
    };
    Gradients {
        gx: grid(gx),
        gy: grid(gy),
        magnitude: grid(magnitude),
    }
}

fn as_grid(img: &GrayImage) -> Grid {
    Grid {
        height: img.height(),
        width: img.width(),
        values: img.pixels().to_vec(),
    }
}

pub fn sobel_gradients(img: &GrayImage) -> Result<Gradients> {
    check_min_size(img.height(), img.width(), 3)?;
    Ok(sobel_on_grid(&as_grid(img)))
}

/// Marks pixels whose magnitude exceeds `factor · mean(magnitude)`.
pub fn sobel_edges(img: &GrayImage, cfg: &EdgeConfig) -> Result<EdgeMap> {
    cfg.validate()?;
    let g = sobel_gradients(img)?;
    let mag = &g.magnitude.values;
    let mean = mag.iter().sum::<f64>() / mag.len() as f64;
    let threshold = cfg.sobel_threshold_factor * mean;
    Ok(EdgeMap::from_mask(
        img.height(),
        img.width(),
        mag.iter().map(|&m| m > threshold),
    ))
}

/// Normalized 1-D Gaussian of radius `⌈3σ⌉`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable Gaussian blur, rows first then columns.
pub fn gaussian_smooth(img: &GrayImage, sigma: f64) -> Grid {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let src = as_grid(img);
    let (h, w) = (src.height, src.width);

    let mut horizontal = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            horizontal[r * w + c] = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * src.clamped(r as isize, c as isize + k as isize - radius))
                .sum();
        }
    }
    let horizontal = Grid {
        height: h,
        width: w,
        values: horizontal,
    };
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            out[r * w + c] = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * horizontal.clamped(r as isize + k as isize - radius, c as isize))
                .sum();
        }
    }
    Grid {
        height: h,
        width: w,
        values: out,
    }
}

/// Row/column step towards the positive neighbor along the gradient direction,
/// quantized to 0°, 45°, 90° or 135° (bin edges at odd multiples of 22.5°).
fn quantized_step(gx: f64, gy: f64) -> (isize, isize) {
    let mut angle = gy.atan2(gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if angle >= 180.0 {
        angle -= 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        (0, 1)
    } else if angle < 67.5 {
        (1, 1)
    } else if angle < 112.5 {
        (1, 0)
    } else {
        (1, -1)
    }
}

/// Non-maximum suppression. A pixel survives when its magnitude is strictly
/// greater than the neighbor behind it and at least the neighbor ahead of it
/// along the quantized gradient direction, so a two-pixel plateau keeps
/// exactly one pixel. Suppressed pixels are set to zero.
pub fn non_maximum_suppression(g: &Gradients) -> Grid {
    let mag = &g.magnitude;
    let (h, w) = (mag.height, mag.width);
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let m = mag.values[i];
            if m == 0.0 {
                continue;
            }
            let (dr, dc) = quantized_step(g.gx.values[i], g.gy.values[i]);
            let (ri, ci) = (r as isize, c as isize);
            let ahead = mag.clamped(ri + dr, ci + dc);
            let behind = mag.clamped(ri - dr, ci - dc);
            if m > behind && m >= ahead {
                out[i] = m;
            }
        }
    }
    Grid {
        height: h,
        width: w,
        values: out,
    }
}

/// Nearest-rank percentile of the nonzero values; `None` when all are zero.
pub fn nonzero_percentile(values: &[f64], percentile: f64) -> Option<f64> {
    let mut nz: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    if nz.is_empty() {
        return None;
    }
    nz.sort_by(f64::total_cmp);
    let rank = ((percentile / 100.0) * nz.len() as f64).ceil() as usize;
    Some(nz[rank.clamp(1, nz.len()) - 1])
}

/// Two-threshold edge linking: pixels `≥ high` are strong, pixels `≥ low`
/// are weak and survive only when 8-connected (transitively) to a strong pixel.
pub fn hysteresis(mag: &Grid, low: f64, high: f64) -> EdgeMap {
    let (h, w) = (mag.height, mag.width);
    let mut keep = vec![false; h * w];
    let mut queue = VecDeque::new();
    for (i, &m) in mag.values.iter().enumerate() {
        if m > 0.0 && m >= high {
            keep[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (r, c) = ((i / w) as isize, (i % w) as isize);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (nr, nc) = (r + dr, c + dc);
                if (dr, dc) == (0, 0) || nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    continue;
                }
                let j = nr as usize * w + nc as usize;
                if !keep[j] && mag.values[j] > 0.0 && mag.values[j] >= low {
                    keep[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    EdgeMap::from_mask(h, w, keep)
}

/// Smooth, Sobel, non-maximum suppression, hysteresis.
pub fn canny_edges(img: &GrayImage, cfg: &EdgeConfig) -> Result<EdgeMap> {
    cfg.validate()?;
    check_min_size(img.height(), img.width(), 2 * cfg.smoothing_radius() + 1)?;
    // work relative to the image minimum; gradients do not see the offset
    let floor = img.pixels().iter().copied().fold(f64::INFINITY, f64::min);
    let relative = GrayImage::new(
        img.height(),
        img.width(),
        img.pixels().iter().map(|p| p - floor).collect(),
    )?;
    let smoothed = gaussian_smooth(&relative, cfg.canny_sigma);
    let gradients = sobel_on_grid(&smoothed);
    let Some(high) = nonzero_percentile(&gradients.magnitude.values, cfg.canny_high_percentile)
    else {
        return Ok(EdgeMap::from_mask(
            img.height(),
            img.width(),
            std::iter::repeat_n(false, img.pixels().len()),
        ));
    };
    let thinned = non_maximum_suppression(&gradients);
    Ok(hysteresis(&thinned, cfg.canny_low_ratio * high, high))
}

/// The edge stage applied to database images and probes alike.
pub fn apply_edge_stage(img: &GrayImage, cfg: &EdgeConfig) -> Result<GrayImage> {
    match cfg.method {
        EdgeMethod::None => Ok(img.clone()),
        EdgeMethod::Sobel => Ok(sobel_edges(img, cfg)?.into_image()),
        EdgeMethod::Canny => Ok(canny_edges(img, cfg)?.into_image()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(h: usize, w: usize) -> GrayImage {
        GrayImage::from_fn(h, w, |_, c| if c >= w / 2 { 1.0 } else { 0.0 }).unwrap()
    }

    /// Direct correlation with explicit replicate-padded indexing.
    fn brute_sobel(img: &GrayImage, kernel: &[[f64; 3]; 3]) -> Vec<f64> {
        let (h, w) = img.dims();
        let mut out = Vec::new();
        for r in 0..h as isize {
            for c in 0..w as isize {
                let mut s = 0.0;
                for kr in 0..3isize {
                    for kc in 0..3isize {
                        let rr = (r + kr - 1).max(0).min(h as isize - 1) as usize;
                        let cc = (c + kc - 1).max(0).min(w as isize - 1) as usize;
                        s += kernel[kr as usize][kc as usize] * img.pixel(rr, cc);
                    }
                }
                out.push(s);
            }
        }
        out
    }

    #[test]
    fn constant_image_has_no_gradient() {
        let img = GrayImage::filled(5, 6, 0.3).unwrap();
        let g = sobel_gradients(&img).unwrap();
        assert!(g.gx.values.iter().all(|&v| v == 0.0));
        assert!(g.gy.values.iter().all(|&v| v == 0.0));
        assert!(g.magnitude.values.iter().all(|&v| v == 0.0));
        let cfg = EdgeConfig::default();
        assert_eq!(sobel_edges(&img, &cfg).unwrap().count(), 0);
        let big = GrayImage::filled(20, 20, 0.7).unwrap();
        assert_eq!(canny_edges(&big, &cfg).unwrap().count(), 0);
    }

    #[test]
    fn step_magnitude_matches_brute_force() {
        let img = step(6, 8);
        let g = sobel_gradients(&img).unwrap();
        assert_eq!(g.gx.values, brute_sobel(&img, &SOBEL_X));
        assert_eq!(g.gy.values, brute_sobel(&img, &SOBEL_Y));
        for r in 0..6 {
            for c in 0..8 {
                let expected = if c == 3 || c == 4 { 4.0 } else { 0.0 };
                assert_eq!(g.magnitude.at(r, c), expected, "({r},{c})");
            }
        }
    }

    #[test]
    fn impulse_response_is_flipped_kernel() {
        let img = GrayImage::from_fn(3, 3, |r, c| if (r, c) == (1, 1) { 1.0 } else { 0.0 }).unwrap();
        let g = sobel_gradients(&img).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(g.gx.at(r, c), SOBEL_X[2 - r][2 - c]);
                assert_eq!(g.gy.at(r, c), SOBEL_Y[2 - r][2 - c]);
            }
        }
    }

    #[test]
    fn too_small_images_rejected() {
        let img = GrayImage::filled(2, 5, 0.0).unwrap();
        assert!(matches!(sobel_gradients(&img), Err(Error::ImageTooSmall { .. })));
        let img = GrayImage::filled(10, 10, 0.0).unwrap();
        assert!(matches!(
            canny_edges(&img, &EdgeConfig::default()),
            Err(Error::ImageTooSmall { min: 11, .. })
        ));
    }

    #[test]
    fn sobel_edges_on_step() {
        // width 12: mean magnitude = 2·4/12, threshold 4·(2/3) < 4
        let img = step(5, 12);
        let cfg = EdgeConfig {
            sobel_threshold_factor: 4.0,
            ..EdgeConfig::with_method(EdgeMethod::Sobel)
        };
        let edges = sobel_edges(&img, &cfg).unwrap();
        for r in 0..5 {
            for c in 0..12 {
                assert_eq!(edges.at(r, c), if c == 5 || c == 6 { 1.0 } else { 0.0 });
            }
        }
        let tiny = EdgeConfig {
            sobel_threshold_factor: 1e-12,
            ..cfg
        };
        let img = GrayImage::from_fn(6, 6, |r, c| ((r * 3 + c * c) % 5) as f64 / 4.0).unwrap();
        let mag = sobel_gradients(&img).unwrap().magnitude;
        let edges = sobel_edges(&img, &tiny).unwrap();
        for (e, m) in edges.pixels.iter().zip(&mag.values) {
            assert_eq!(*e == 1.0, *m > 0.0);
        }
    }

    #[test]
    fn canny_thins_step_to_single_line() {
        let img = step(24, 24);
        let edges = canny_edges(&img, &EdgeConfig::with_method(EdgeMethod::Canny)).unwrap();
        for r in 0..24 {
            let cols: Vec<usize> = (0..24).filter(|&c| edges.at(r, c) == 1.0).collect();
            assert_eq!(cols.len(), 1, "row {r}: {cols:?}");
            assert!(cols[0] == 11 || cols[0] == 12);
        }
        let first: Vec<usize> = (0..24).filter(|&c| edges.at(0, c) == 1.0).collect();
        for r in 1..24 {
            assert_eq!(edges.at(r, first[0]), 1.0);
        }
    }

    #[test]
    fn hysteresis_drops_isolated_weak_blob() {
        let mut values = vec![0.0; 10 * 10];
        // strong blob with a weak tail
        values[11] = 10.0;
        values[12] = 5.0;
        values[13] = 5.0;
        // isolated weak blob
        values[77] = 5.0;
        values[78] = 5.0;
        let grid = Grid {
            height: 10,
            width: 10,
            values,
        };
        let edges = hysteresis(&grid, 4.0, 8.0);
        assert_eq!(edges.at(1, 1), 1.0);
        assert_eq!(edges.at(1, 2), 1.0);
        assert_eq!(edges.at(1, 3), 1.0);
        assert_eq!(edges.at(7, 7), 0.0);
        assert_eq!(edges.at(7, 8), 0.0);
        assert_eq!(edges.count(), 3);
    }

    #[test]
    fn percentile_nearest_rank() {
        let v = [0.0, 4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(nonzero_percentile(&v, 70.0), Some(7.0));
        assert_eq!(nonzero_percentile(&v, 1.0), Some(1.0));
        assert_eq!(nonzero_percentile(&v, 99.9), Some(10.0));
        assert_eq!(nonzero_percentile(&[0.0; 4], 50.0), None);
    }

    #[test]
    fn edge_stage_dispatch() {
        let img = step(12, 12);
        assert_eq!(apply_edge_stage(&img, &EdgeConfig::default()).unwrap(), img);
        let flat = GrayImage::filled(16, 16, 0.4).unwrap();
        let canny = apply_edge_stage(&flat, &EdgeConfig::with_method(EdgeMethod::Canny)).unwrap();
        assert!(canny.pixels().iter().all(|&p| p == 0.0));
        let cfg = EdgeConfig::with_method(EdgeMethod::Sobel);
        let staged = apply_edge_stage(&img, &cfg).unwrap();
        assert_eq!(staged.pixels(), sobel_edges(&img, &cfg).unwrap().pixels.as_slice());
    }

    #[test]
    fn invalid_config_rejected() {
        let img = step(16, 16);
        for cfg in [
            EdgeConfig { canny_sigma: 0.0, ..EdgeConfig::with_method(EdgeMethod::Canny) },
            EdgeConfig { canny_low_ratio: 1.0, ..EdgeConfig::with_method(EdgeMethod::Canny) },
            EdgeConfig { canny_high_percentile: 100.0, ..EdgeConfig::with_method(EdgeMethod::Canny) },
            EdgeConfig { sobel_threshold_factor: -1.0, ..EdgeConfig::with_method(EdgeMethod::Sobel) },
        ] {
            assert!(matches!(apply_edge_stage(&img, &cfg), Err(Error::InvalidConfig(_))));
        }
    }

    /// Smooth tie-free fixture: a tilted ring.
    fn ring(n: usize) -> GrayImage {
        GrayImage::from_fn(n, n, |r, c| {
            let (y, x) = (r as f64 - 13.3, c as f64 - 11.7);
            let d = (x * x * 1.1 + y * y * 0.9 + 0.3 * x * y).sqrt();
            if (6.0..10.5).contains(&d) { 0.85 } else { 0.1 }
        })
        .unwrap()
    }

    #[test]
    fn canny_rotation_equivariance_on_tie_free_fixture() {
        let img = ring(28);
        let cfg = EdgeConfig::with_method(EdgeMethod::Canny);
        let rotated_out = canny_edges(&img.rotate90(), &cfg).unwrap().into_image();
        let out_rotated = canny_edges(&img, &cfg).unwrap().into_image().rotate90();
        let diff = rotated_out
            .pixels()
            .iter()
            .zip(out_rotated.pixels())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(diff, 0);
    }

    #[test]
    fn raising_high_percentile_never_adds_edges() {
        let img = ring(28);
        let mut previous: Option<EdgeMap> = None;
        for pct in [30.0, 50.0, 70.0, 85.0, 95.0] {
            let cfg = EdgeConfig {
                canny_high_percentile: pct,
                ..EdgeConfig::with_method(EdgeMethod::Canny)
            };
            let edges = canny_edges(&img, &cfg).unwrap();
            if let Some(prev) = &previous {
                for (now, before) in edges.pixels.iter().zip(&prev.pixels) {
                    assert!(*now <= *before);
                }
            }
            previous = Some(edges);
        }
    }

    #[test]
    fn canny_shift_invariance_on_step() {
        let low = GrayImage::from_fn(20, 20, |r, c| if c + r / 3 >= 10 { 0.5 } else { 0.125 }).unwrap();
        let high = GrayImage::from_fn(20, 20, |r, c| if c + r / 3 >= 10 { 0.75 } else { 0.375 }).unwrap();
        let cfg = EdgeConfig::with_method(EdgeMethod::Canny);
        assert_eq!(canny_edges(&low, &cfg).unwrap(), canny_edges(&high, &cfg).unwrap());
    }

    fn dyadic_image(h: usize, w: usize, seed: u64) -> GrayImage {
        GrayImage::from_fn(h, w, |r, c| {
            let x = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(((r * w + c) as u64).wrapping_mul(1442695040888963407));
            ((x >> 33) % 49) as f64 / 64.0
        })
        .unwrap()
    }

    proptest! {
        #[test]
        fn edge_maps_are_binary(seed in any::<u64>(), method in 1u8..3) {
            let img = dyadic_image(14, 15, seed);
            let cfg = EdgeConfig::with_method(EdgeMethod::from_code(method).unwrap());
            let out = apply_edge_stage(&img, &cfg).unwrap();
            prop_assert!(out.pixels().iter().all(|&p| p == 0.0 || p == 1.0));
        }

        #[test]
        fn sobel_magnitude_rotates_with_image(seed in any::<u64>(), h in 3usize..9, w in 3usize..9) {
            let img = dyadic_image(h, w, seed);
            let direct = sobel_gradients(&img).unwrap();
            let rotated = sobel_gradients(&img.rotate90()).unwrap();
            // rotated (r, c) samples original (h-1-c, r)
            for r in 0..w {
                for c in 0..h {
                    let orig = (h - 1 - c, r);
                    prop_assert_eq!(rotated.magnitude.at(r, c), direct.magnitude.at(orig.0, orig.1));
                    prop_assert_eq!(rotated.gx.at(r, c), -direct.gy.at(orig.0, orig.1));
                    prop_assert_eq!(rotated.gy.at(r, c), direct.gx.at(orig.0, orig.1));
                }
            }
        }

        #[test]
        fn sobel_edges_shift_invariant(seed in any::<u64>()) {
            let img = dyadic_image(8, 9, seed);
            let shifted = GrayImage::new(8, 9, img.pixels().iter().map(|p| p + 0.125).collect()).unwrap();
            let cfg = EdgeConfig::with_method(EdgeMethod::Sobel);
            prop_assert_eq!(sobel_edges(&img, &cfg).unwrap(), sobel_edges(&shifted, &cfg).unwrap());
        }
    }
}
