//! Mixed matrix norms and vector soft-thresholding.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Per-column ℓ₁ norms, accumulated row by row.
pub fn column_l1_norms(m: &DenseMatrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for r in 0..m.rows() {
        for (acc, v) in out.iter_mut().zip(m.row(r)) {
            *acc += v.abs();
        }
    }
    out
}

/// Per-column ℓ∞ norms.
pub fn column_max_abs(m: &DenseMatrix) -> Vec<f64> {
    let mut out = vec![0.0f64; m.cols()];
    for r in 0..m.rows() {
        for (acc, v) in out.iter_mut().zip(m.row(r)) {
            *acc = acc.max(v.abs());
        }
    }
    out
}

/// Mixed ℓ₁,∞ norm: the largest column ℓ₁ norm (the induced ℓ₁ operator norm).
pub fn mixed_norm_1inf(m: &DenseMatrix) -> f64 {
    column_l1_norms(m).into_iter().fold(0.0, f64::max)
}

/// Mixed ℓ∞,1 norm: the sum of column ℓ∞ norms. Dual of [`mixed_norm_1inf`].
pub fn mixed_norm_inf1(m: &DenseMatrix) -> f64 {
    column_max_abs(m).into_iter().sum()
}

/// Elementwise `sign(v) * max(|v| - theta, 0)`.
pub fn soft_threshold(v: &[f64], theta: f64) -> Result<Vec<f64>> {
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::invalid(format!(
            "threshold must be finite and non-negative, got {theta}"
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("vector has non-finite entries"));
    }
    Ok(v.iter().map(|&x| shrink(x, theta)).collect())
}

#[inline]
pub(crate) fn shrink(x: f64, theta: f64) -> f64 {
    (x.abs() - theta).max(0.0).copysign(x)
}
