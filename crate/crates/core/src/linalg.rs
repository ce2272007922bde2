//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Largest tolerated absolute asymmetry `|M_ij - M_ji|` for a covariance.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub type Chol = Cholesky<f64, Dyn>;

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Cholesky factorization with a single jittered retry.
///
/// On failure the diagonal is shifted by `1e-12 * trace / dim` and the
/// factorization attempted once more; a second failure is reported as
/// [`Error::CholeskyFailure`].
pub fn cholesky(m: &DMatrix<f64>, name: &str) -> Result<Chol> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let dim = m.nrows().max(1) as f64;
    let jitter = 1e-12 * (m.trace() / dim).abs();
    let mut shifted = m.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += jitter;
    }
    Cholesky::new(shifted).ok_or_else(|| Error::CholeskyFailure(name.to_string()))
}

/// `log det` of the factored matrix, as twice the sum of the log-diagonal of `L`.
pub fn logdet(chol: &Chol) -> f64 {
    let l = chol.l_dirty();
    (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
}

pub fn logdet_spd(m: &DMatrix<f64>, name: &str) -> Result<f64> {
    cholesky(m, name).map(|c| logdet(&c))
}

pub fn spd_inverse(m: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    Ok(symmetrize(&cholesky(m, name)?.inverse()))
}

/// True when `m` is symmetric within [`SYMMETRY_TOL`] and admits a Cholesky factor.
pub fn is_spd(m: &DMatrix<f64>) -> bool {
    m.is_square() && max_asymmetry(m) <= SYMMETRY_TOL && Cholesky::new(symmetrize(m)).is_some()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn sym_eigen_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = symmetrize(m).symmetric_eigenvalues();
    (eig.min(), eig.max())
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen_extremes(m).0
}

/// Assemble a block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(dim, dim);
    let mut at = 0;
    for b in blocks {
        let d = b.nrows();
        out.view_mut((at, at), (d, d)).copy_from(*b);
        at += d;
    }
    out
}
