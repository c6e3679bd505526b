//! The reduced image space built with the snapshot method.
//!
//! With `A` the mean-centered database (`N·K × M`), the eigenvectors `V` of
//! the small `M × M` matrix `AᵀA` give the basis `U = A·V` and the training
//! matrix `Ω = Uᵀ·A`. The `N·K × N·K` covariance `AAᵀ` is never formed.
//! Columns of `U` are left unnormalized, so `‖U[:,k]‖² = λ_k`.

mod jacobi;

pub use jacobi::{eig_symmetric, SymmetricEigen, NEGATIVE_TOLERANCE};

use nalgebra::{DMatrix, DVector};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::edges::{apply_edge_stage, EdgeConfig, EdgeMethod};
use crate::error::{Error, Result};
use crate::imaging::{vectorize, FingerprintDatabase, GrayImage, ImageLabel, NoiseSpec};

/// Eigenvalues at or below this fraction of the largest do not count toward the rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A trained model: mean image, basis, spectrum and reduced training images.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpace {
    pub mean: DVector<f64>,
    /// `N·K × M`, column `k` pairs with `eigenvalues[k]`.
    pub basis: DMatrix<f64>,
    /// Descending; `eigenvalues[0]` is the largest.
    pub eigenvalues: DVector<f64>,
    /// `M × M`, column `m` is the reduced image of database entry `m`.
    pub omega: DMatrix<f64>,
    pub effective_rank: usize,
    pub edge_config: EdgeConfig,
    pub height: usize,
    pub width: usize,
}

impl EigenSpace {
    /// Assembles a space from stored arrays, recomputing the effective rank.
    pub fn from_parts(
        mean: DVector<f64>,
        basis: DMatrix<f64>,
        eigenvalues: DVector<f64>,
        omega: DMatrix<f64>,
        edge_config: EdgeConfig,
        height: usize,
        width: usize,
    ) -> Result<Self> {
        let pixels = height * width;
        let m = eigenvalues.len();
        if mean.len() != pixels || basis.nrows() != pixels {
            return Err(Error::LengthMismatch {
                left: pixels,
                right: basis.nrows(),
            });
        }
        if basis.ncols() != m || omega.nrows() != m || omega.ncols() != m {
            return Err(Error::LengthMismatch {
                left: m,
                right: omega.ncols(),
            });
        }
        Ok(Self {
            effective_rank: effective_rank(&eigenvalues),
            mean,
            basis,
            eigenvalues,
            omega,
            edge_config,
            height,
            width,
        })
    }

    /// Number of training images `M`.
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Largest eigenvalue `λ₁₁`.
    pub fn largest_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Coordinates of an already edge-processed, vectorized image.
    fn coordinates(&self, values: &DVector<f64>) -> DVector<f64> {
        self.basis.tr_mul(&(values - &self.mean))
    }
}

pub fn effective_rank(eigenvalues: &DVector<f64>) -> usize {
    let Some(&top) = eigenvalues.iter().next() else {
        return 0;
    };
    if top <= 0.0 {
        return 0;
    }
    eigenvalues.iter().filter(|&&l| l > RANK_TOLERANCE * top).count()
}

/// A probe expressed in eigenspace coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coords: DVector<f64>,
    pub path: Option<String>,
    pub noise: Option<NoiseSpec>,
    pub edge_method: EdgeMethod,
}

/// Element-wise mean of the database columns.
pub fn compute_mean(db: &FingerprintDatabase) -> Result<DVector<f64>> {
    let data = db.data();
    if data.ncols() == 0 {
        return Err(Error::InsufficientImages(0));
    }
    // running mean: exact for identical columns
    let mut mean = data.column(0).into_owned();
    for (k, col) in data.column_iter().enumerate().skip(1) {
        mean += (col - &mean) / (k + 1) as f64;
    }
    Ok(mean)
}

/// Subtracts `mean` from every column.
pub fn center(data: &DMatrix<f64>, mean: &DVector<f64>) -> Result<DMatrix<f64>> {
    if data.nrows() != mean.len() {
        return Err(Error::LengthMismatch {
            left: data.nrows(),
            right: mean.len(),
        });
    }
    let mut a = data.clone();
    for mut col in a.column_iter_mut() {
        col -= mean;
    }
    Ok(a)
}

/// `R_A = AᵀA`, the `M × M` stand-in for the full covariance.
pub fn reduced_covariance(a: &DMatrix<f64>) -> DMatrix<f64> {
    let r = a.tr_mul(a);
    // exact symmetry for the solver
    (&r + r.transpose()) * 0.5
}

/// `U = A·V`, unnormalized.
pub fn build_space(a: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != v.nrows() {
        return Err(Error::LengthMismatch {
            left: a.ncols(),
            right: v.nrows(),
        });
    }
    Ok(a * v)
}

/// `Ω = Uᵀ·A`, computed column by column so each column matches a probe projection bit for bit.
pub fn train_matrix(u: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if u.nrows() != a.nrows() {
        return Err(Error::LengthMismatch {
            left: u.nrows(),
            right: a.nrows(),
        });
    }
    let mut omega = DMatrix::zeros(u.ncols(), a.ncols());
    for (m, col) in a.column_iter().enumerate() {
        omega.set_column(m, &u.tr_mul(&col));
    }
    Ok(omega)
}

fn edge_stage_all(images: &[GrayImage], cfg: &EdgeConfig) -> Result<Vec<GrayImage>> {
    #[cfg(feature = "parallel")]
    let iter = images.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = images.iter();
    iter.map(|img| apply_edge_stage(img, cfg)).collect()
}

/// Edge stage on every image, then mean, centering, snapshot eigenproblem, basis and Ω.
pub fn train(db: &FingerprintDatabase, edge_config: &EdgeConfig) -> Result<EigenSpace> {
    if db.len() < 2 {
        return Err(Error::InsufficientImages(db.len()));
    }
    edge_config.validate()?;
    let (height, width) = db.dims();
    let processed;
    let db = if edge_config.method == EdgeMethod::None {
        db
    } else {
        let images = edge_stage_all(&db.images(), edge_config)?;
        let labels: Vec<ImageLabel> = db.labels().to_vec();
        processed = FingerprintDatabase::from_images(&images, labels)?;
        &processed
    };

    let mean = compute_mean(db)?;
    let a = center(db.data(), &mean)?;
    let r = reduced_covariance(&a);
    let eig = eig_symmetric(&r)?;
    let basis = build_space(&a, &eig.vectors)?;
    let omega = train_matrix(&basis, &a)?;
    EigenSpace::from_parts(
        mean,
        basis,
        eig.values,
        omega,
        *edge_config,
        height,
        width,
    )
}

/// Applies the space's edge stage to `img` and projects it: `Uᵀ·(v − mean)`.
pub fn project(space: &EigenSpace, img: &GrayImage) -> Result<Projection> {
    if img.dims() != space.dims() {
        return Err(Error::DimensionMismatch {
            expected: space.dims(),
            found: img.dims(),
        });
    }
    let staged = apply_edge_stage(img, &space.edge_config)?;
    let values = DVector::from_vec(vectorize(&staged).values);
    Ok(Projection {
        coords: space.coordinates(&values),
        path: None,
        noise: None,
        edge_method: space.edge_config.method,
    })
}
