//! Cheap lower bounds on the mixed ℓ₁,∞ norm `t★` of the prox solution.
//!
//! A good bound lets the solver freeze every column whose ℓ₁ norm does not
//! exceed it, since those columns pass through the prox unchanged.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::norms::{column_l1_norms, column_max_abs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// `(Σ_{i∈S} ‖vᵢ‖₁ − nλ) / |S|` for a column subset `S`.
    SubsetMax,
    /// `(‖V‖∞,1 − λ) / m`.
    Global,
    /// Both bounds were negative and the trivial bound 0 was used.
    ZeroClamp,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::SubsetMax => "subset_max",
            BoundKind::Global => "global",
            BoundKind::ZeroClamp => "zero_clamp",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub provenance: BoundKind,
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "regularization weight must be finite and positive, got {lambda}"
        )))
    }
}

/// Bound from an arbitrary non-empty column subset. May be negative.
pub fn lower_bound_subset(v: &DenseMatrix, lambda: f64, subset: &[usize]) -> Result<LowerBound> {
    check_lambda(lambda)?;
    if subset.is_empty() {
        return Err(Error::invalid("column subset must be non-empty"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= v.cols()) {
        return Err(Error::invalid(format!(
            "column index {bad} out of range for {} columns",
            v.cols()
        )));
    }
    let l1 = column_l1_norms(v);
    let total: f64 = subset.iter().map(|&i| l1[i]).sum();
    Ok(LowerBound {
        value: (total - v.rows() as f64 * lambda) / subset.len() as f64,
        provenance: BoundKind::SubsetMax,
    })
}

/// Best subset bound. For a fixed subset size the sum is largest on the
/// columns with the largest ℓ₁ norms, so only top-k prefixes are scanned.
pub fn maximize_lower_bound(v: &DenseMatrix, lambda: f64) -> Result<LowerBound> {
    check_lambda(lambda)?;
    Ok(maximize_from_norms(&column_l1_norms(v), v.rows(), lambda))
}

pub fn lower_bound_global(v: &DenseMatrix, lambda: f64) -> Result<LowerBound> {
    check_lambda(lambda)?;
    Ok(global_from_norms(&column_max_abs(v), lambda))
}

pub(crate) fn maximize_from_norms(l1: &[f64], rows: usize, lambda: f64) -> LowerBound {
    let mut sorted = l1.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let penalty = rows as f64 * lambda;
    let mut partial = 0.0;
    let mut best = f64::NEG_INFINITY;
    for (k, w) in sorted.iter().enumerate() {
        partial += w;
        best = best.max((partial - penalty) / (k + 1) as f64);
    }
    LowerBound {
        value: best,
        provenance: BoundKind::SubsetMax,
    }
}

pub(crate) fn global_from_norms(maxes: &[f64], lambda: f64) -> LowerBound {
    let inf1: f64 = maxes.iter().sum();
    LowerBound {
        value: (inf1 - lambda) / maxes.len() as f64,
        provenance: BoundKind::Global,
    }
}

/// Largest of the two bounds and zero.
pub(crate) fn initial_bound(l1: &[f64], maxes: &[f64], rows: usize, lambda: f64) -> LowerBound {
    let subset = maximize_from_norms(l1, rows, lambda);
    let global = global_from_norms(maxes, lambda);
    let best = if subset.value >= global.value { subset } else { global };
    if best.value > 0.0 {
        best
    } else {
        LowerBound {
            value: 0.0,
            provenance: BoundKind::ZeroClamp,
        }
    }
}
