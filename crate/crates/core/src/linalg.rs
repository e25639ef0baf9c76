use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue cutoff used by [`pseudo_inverse_sym`].
pub const PINV_CUTOFF: f64 = 1e-10;

/// P = I − 11ᵀ/d, the projection onto the orthogonal complement of 1.
pub fn centering_projection(d: usize) -> DMatrix<f64> {
    DMatrix::identity(d, d) - DMatrix::from_element(d, d, 1.0 / d as f64)
}

pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix plus the log of its
/// pseudo-determinant (product of retained eigenvalues) and its rank.
pub struct SymmetricPinv {
    pub inverse: DMatrix<f64>,
    pub log_pdet: f64,
    pub rank: usize,
}

pub fn pseudo_inverse_sym(a: &DMatrix<f64>) -> SymmetricPinv {
    let d = a.nrows();
    let sym = 0.5 * (a + a.transpose());
    let eig = SymmetricEigen::new(sym);
    let largest = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = PINV_CUTOFF * largest;
    let mut inverse = DMatrix::zeros(d, d);
    let mut log_pdet = 0.0;
    let mut rank = 0;
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cutoff && largest > 0.0 {
            let v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
            inverse += (&v * v.transpose()) / lambda;
            log_pdet += lambda.abs().ln();
            rank += 1;
        }
    }
    SymmetricPinv {
        inverse,
        log_pdet,
        rank,
    }
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let sym = 0.5 * (a + a.transpose());
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v))
}

/// Lower Cholesky factor, failing with a module-qualified error.
pub fn cholesky(a: &DMatrix<f64>, module: &'static str) -> Result<DMatrix<f64>> {
    nalgebra::Cholesky::new(a.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::numerical(module, "matrix is not positive definite"))
}
