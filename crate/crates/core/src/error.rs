use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("cannot decode image {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("unsupported image {path}: {reason}")]
    UnsupportedImage { path: PathBuf, reason: String },

    #[error("image has a zero dimension")]
    EmptyImage,

    #[error("pixel buffer holds {found} values, expected {expected}")]
    PixelCount { expected: usize, found: usize },

    #[error("pixel {index} = {value} lies outside [0, 1]")]
    PixelRange { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient images: need at least 2, found {0}")]
    InsufficientImages(usize),

    #[error("invalid glob pattern: {0}")]
    Pattern(String),

    #[error("noise variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("image {height}x{width} is smaller than the required {min}x{min}")]
    ImageTooSmall {
        height: usize,
        width: usize,
        min: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigen solver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("eigenvalue {value:e} is negative beyond tolerance (largest {largest:e})")]
    NegativeEigenvalue { value: f64, largest: f64 },

    #[error("fully degenerate eigenspace cannot separate distinct vectors")]
    DegenerateSpace,

    #[error("inconclusive verdict cannot be counted as a binary outcome")]
    InconclusiveVerdict,

    #[error("test set needs both in-base and out-of-base probes")]
    MissingClass,

    #[error("database needs at least 2 distinct finger ids, found {0}")]
    TooFewFingers(usize),

    #[error("split requires parsed finger labels; {0} is unlabeled")]
    MissingLabel(String),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),

    #[error("unexpected end of file")]
    UnexpectedEof,

    #[error("file length {actual} does not match the {expected} bytes implied by the header")]
    FileLength { expected: u64, actual: u64 },

    #[error("corrupt file: {0}")]
    Corrupt(String),
}
