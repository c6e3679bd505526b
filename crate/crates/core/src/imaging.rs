//! Grayscale image ingestion, vectorization and seeded noise.
//!
//! Pixels are reals in `[0, 1]` (raw byte / 255). Images are flattened
//! row-major: row 0 first, then row 1, and so on.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, ImageFormat, ImageReader};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the generator behind [`add_gaussian_noise`], recorded in output metadata.
pub const NOISE_GENERATOR: &str =
    "ChaCha20 (rand_chacha 0.9, seed_from_u64) + StandardNormal ziggurat (rand_distr 0.5)";

/// A normalized 2-D intensity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != height * width {
            return Err(Error::PixelCount {
                expected: height * width,
                found: pixels.len(),
            });
        }
        if let Some((index, &value)) = pixels
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::PixelRange { index, value });
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// Builds an image from a per-pixel function of `(row, col)`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(height, width, pixels)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Rotates the image 90° clockwise.
    pub fn rotate90(&self) -> GrayImage {
        let (h, w) = self.dims();
        let mut pixels = Vec::with_capacity(h * w);
        for r in 0..w {
            for c in 0..h {
                pixels.push(self.pixel(h - 1 - c, r));
            }
        }
        GrayImage {
            height: w,
            width: h,
            pixels,
        }
    }

    /// Quantizes to 8 bits (round to nearest).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|p| (p * 255.0).round() as u8)
            .collect()
    }

    /// Writes a binary PGM (P5) of the image.
    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        let buf = image::GrayImage::from_raw(self.width as u32, self.height as u32, self.to_bytes())
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, ImageFormat::Pnm)
            .map_err(|e| Error::Decode {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
    }
}

/// A flattened image: one column of the database matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageVector {
    pub values: Vec<f64>,
    pub height: usize,
    pub width: usize,
}

impl ImageVector {
    pub fn reshape(&self) -> Result<GrayImage> {
        GrayImage::new(self.height, self.width, self.values.clone())
    }
}

pub fn vectorize(img: &GrayImage) -> ImageVector {
    ImageVector {
        values: img.pixels.clone(),
        height: img.height,
        width: img.width,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceFormat {
    Tiff,
    Pgm,
}

impl SourceFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "tif" | "tiff" => Some(SourceFormat::Tiff),
            "pgm" | "pnm" => Some(SourceFormat::Pgm),
            _ => None,
        }
    }
}

/// Loads an 8-bit single-channel image; pixels become `byte / 255`.
pub fn load_image(path: &Path, format: SourceFormat) -> Result<GrayImage> {
    let decode_err = |e: image::ImageError| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut reader = ImageReader::open(path)?;
    reader.set_format(match format {
        SourceFormat::Tiff => ImageFormat::Tiff,
        SourceFormat::Pgm => ImageFormat::Pnm,
    });
    let decoded = reader.decode().map_err(decode_err)?;
    if decoded.color() != ColorType::L8 {
        return Err(Error::UnsupportedImage {
            path: path.to_path_buf(),
            reason: format!("expected 8-bit grayscale, found {:?}", decoded.color()),
        });
    }
    let luma = decoded.as_luma8().expect("color type checked above");
    let (width, height) = (luma.width() as usize, luma.height() as usize);
    let pixels = luma.as_raw().iter().map(|&b| f64::from(b) / 255.0).collect();
    GrayImage::new(height, width, pixels)
}

/// Per-column provenance of a database entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageLabel {
    pub finger: Option<u32>,
    pub impression: Option<u32>,
    pub path: String,
}

impl ImageLabel {
    pub fn is_parsed(&self) -> bool {
        self.finger.is_some() && self.impression.is_some()
    }
}

/// Parses FVC-style `finger_impression.ext` names, e.g. `101_3.tif`.
pub fn parse_fvc_name(path: &Path) -> Option<(u32, u32)> {
    let stem = path.file_stem()?.to_str()?;
    let (finger, impression) = stem.split_once('_')?;
    Some((finger.parse().ok()?, impression.parse().ok()?))
}

/// Column-stacked image vectors (`N·K × M`) with per-column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintDatabase {
    data: DMatrix<f64>,
    labels: Vec<ImageLabel>,
    height: usize,
    width: usize,
    /// Set when at least one filename did not parse and the columns fell
    /// back to lexicographic order.
    pub label_fallback: bool,
}

impl FingerprintDatabase {
    pub fn from_images(images: &[GrayImage], labels: Vec<ImageLabel>) -> Result<Self> {
        if images.len() < 2 {
            return Err(Error::InsufficientImages(images.len()));
        }
        if labels.len() != images.len() {
            return Err(Error::LengthMismatch {
                left: images.len(),
                right: labels.len(),
            });
        }
        let dims = images[0].dims();
        if let Some(bad) = images.iter().find(|img| img.dims() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: bad.dims(),
            });
        }
        let rows = dims.0 * dims.1;
        let data = DMatrix::from_fn(rows, images.len(), |i, m| images[m].pixels[i]);
        let label_fallback = labels.iter().any(|l| !l.is_parsed());
        Ok(Self {
            data,
            labels,
            height: dims.0,
            width: dims.1,
            label_fallback,
        })
    }

    /// Builds a database from an already stacked matrix.
    pub fn from_matrix(
        data: DMatrix<f64>,
        labels: Vec<ImageLabel>,
        height: usize,
        width: usize,
    ) -> Result<Self> {
        if data.ncols() < 2 {
            return Err(Error::InsufficientImages(data.ncols()));
        }
        if data.nrows() != height * width {
            return Err(Error::PixelCount {
                expected: height * width,
                found: data.nrows(),
            });
        }
        if labels.len() != data.ncols() {
            return Err(Error::LengthMismatch {
                left: data.ncols(),
                right: labels.len(),
            });
        }
        let label_fallback = labels.iter().any(|l| !l.is_parsed());
        Ok(Self {
            data,
            labels,
            height,
            width,
            label_fallback,
        })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn labels(&self) -> &[ImageLabel] {
        &self.labels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn image(&self, m: usize) -> GrayImage {
        GrayImage {
            height: self.height,
            width: self.width,
            pixels: self.data.column(m).iter().copied().collect(),
        }
    }

    pub fn images(&self) -> Vec<GrayImage> {
        (0..self.len()).map(|m| self.image(m)).collect()
    }

    /// Keeps the listed columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> Result<Self> {
        let images: Vec<GrayImage> = columns.iter().map(|&m| self.image(m)).collect();
        let labels = columns.iter().map(|&m| self.labels[m].clone()).collect();
        Self::from_images(&images, labels)
    }
}

/// Loads every file in `dir` whose name matches `pattern`.
///
/// Columns are ordered by `(finger, impression)` parsed from FVC names. If
/// any name does not parse, all columns use lexicographic filename order and
/// `label_fallback` is set.
pub fn ingest_database(dir: &Path, pattern: &str) -> Result<FingerprintDatabase> {
    let glob = glob::Pattern::new(pattern).map_err(|e| Error::Pattern(e.to_string()))?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| glob.matches(n))
        })
        .collect();
    if paths.len() < 2 {
        return Err(Error::InsufficientImages(paths.len()));
    }
    paths.sort();
    let parsed: Vec<Option<(u32, u32)>> = paths.iter().map(|p| parse_fvc_name(p)).collect();
    let mut order: Vec<usize> = (0..paths.len()).collect();
    if parsed.iter().all(Option::is_some) {
        order.sort_by_key(|&i| parsed[i]);
    }

    let mut images = Vec::with_capacity(paths.len());
    let mut labels = Vec::with_capacity(paths.len());
    for i in order {
        let path = &paths[i];
        let format = SourceFormat::from_path(path).unwrap_or(SourceFormat::Tiff);
        images.push(load_image(path, format)?);
        labels.push(ImageLabel {
            finger: parsed[i].map(|p| p.0),
            impression: parsed[i].map(|p| p.1),
            path: path.display().to_string(),
        });
    }
    FingerprintDatabase::from_images(&images, labels)
}

/// Gaussian noise parameters in the `imnoise(I, 'gaussian', m, v)` sense.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub mean: f64,
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(mean: f64, variance: f64, seed: u64) -> Result<Self> {
        if variance.is_nan() || variance < 0.0 {
            return Err(Error::NegativeVariance(variance));
        }
        Ok(Self {
            mean,
            variance,
            seed,
        })
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn is_zero(&self) -> bool {
        self.mean == 0.0 && self.variance == 0.0
    }
}

/// The pre-clamp additive field `m + √v·z`, one draw per pixel in row-major order.
pub fn noise_field(len: usize, spec: &NoiseSpec) -> Result<Vec<f64>> {
    if spec.variance.is_nan() || spec.variance < 0.0 {
        return Err(Error::NegativeVariance(spec.variance));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let sd = spec.variance.sqrt();
    Ok((0..len)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            spec.mean + sd * z
        })
        .collect())
}

/// Adds seeded Gaussian noise and clamps the result to `[0, 1]`.
pub fn add_gaussian_noise(img: &GrayImage, spec: &NoiseSpec) -> Result<GrayImage> {
    let field = noise_field(img.pixels.len(), spec)?;
    let pixels = img
        .pixels
        .iter()
        .zip(field)
        .map(|(p, n)| (p + n).clamp(0.0, 1.0))
        .collect();
    Ok(GrayImage {
        height: img.height,
        width: img.width,
        pixels,
    })
}
