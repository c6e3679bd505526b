//! Fingerprint membership verification.
//!
//! The pipeline runs in this order:
//!
//! 1. **imaging** – load 8-bit grayscale images, stack them into a database, add seeded noise.
//! 2. **edges** – optional Sobel or Canny edge stage, applied to database images and probes alike.
//! 3. **eigenspace** – mean, centering, snapshot eigenproblem, basis `U` and training matrix `Ω`.
//! 4. **classifier** – Euclidean and Mahalanobis distances, the H statistic, decision rules.
//! 5. **evaluation** – database split, H-scans and ROC sweeps.
//! 6. **persistence** – flat binary files for spaces and databases.

pub mod classifier;
pub mod edges;
pub mod eigenspace;
pub mod error;
pub mod evaluation;
pub mod imaging;
pub mod persistence;
pub mod synthetic;

pub use classifier::{verify, DecisionConfig, DecisionMode, Verdict, VerificationReport};
pub use edges::{EdgeConfig, EdgeMethod};
pub use eigenspace::{project, train, EigenSpace, Projection};
pub use error::{Error, Result};
pub use evaluation::{
    h_scan, roc_sweep, split_database, HScanRow, LabeledTestSet, NoiseLevel, NoiseLevelName,
    RocPoint, SplitPolicy, Truth,
};
pub use imaging::{FingerprintDatabase, GrayImage, NoiseSpec};
