//! Proximal operator of `λ‖·‖₁,∞` and the projection onto the ℓ∞,1 ball.
//!
//! The prox soft-thresholds every column of `V` with its own threshold
//! `λμᵢ`. The thresholds are tied together through the optimal norm `t★`:
//! every thresholded column ends with ℓ₁ norm exactly `t★`, and the
//! multipliers sum to one. The solver starts from a lower bound on `t★`,
//! projects the columns above the current `t` onto the ℓ₁ ball of radius `t`,
//! and recomputes `t` from the resulting supports until the column set and
//! every support stop changing. `t` never decreases along the way.

use crate::bounds::{check_lambda, initial_bound, BoundKind, LowerBound};
use crate::error::{Error, Result};
use crate::l1ball::{ColumnState, InnerProjection};
use crate::matrix::DenseMatrix;
use crate::norms::{column_l1_norms, column_max_abs, shrink};

/// Relative slack tolerated when round-off makes the `t` update go backwards.
const T_DECREASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxSolution {
    pub x_star: DenseMatrix,
    /// Mixed ℓ₁,∞ norm of `x_star`.
    pub t_star: f64,
    /// Per-column multipliers. Zero outside `active_cols`; they sum to one
    /// whenever `x_star` is non-zero.
    pub mu: Vec<f64>,
    /// Per-column thresholds `λ·mu`, kept separately to avoid a round trip
    /// through the division.
    pub thresholds: Vec<f64>,
    /// Columns whose ℓ₁ norm strictly exceeds `t_star`, ascending.
    pub active_cols: Vec<usize>,
    /// Support of each active column, aligned with `active_cols`. An entry is
    /// in the support when `|v| >= threshold`, so entries landing exactly on
    /// zero are included.
    pub supports: Vec<Vec<usize>>,
    pub iterations: usize,
    /// Value of `t` at the start of each outer iteration.
    pub t_history: Vec<f64>,
    /// Bound used to initialize `t` and freeze columns.
    pub initial_bound: LowerBound,
}

/// Computes `argmin_X ‖X‖₁,∞ + ‖X − V‖²_F / (2λ)`.
pub fn prox_l1inf(v: &DenseMatrix, lambda: f64, strategy: InnerProjection) -> Result<ProxSolution> {
    check_lambda(lambda)?;
    let (n, m) = v.shape();
    let l1 = column_l1_norms(v);
    let maxes = column_max_abs(v);

    let inf1: f64 = maxes.iter().sum();
    if inf1 <= lambda {
        return Ok(zero_solution(v, lambda, &l1, &maxes));
    }

    let bound = initial_bound(&l1, &maxes, n, lambda);
    let mut t = bound.value;

    // Columns at or below the bound are never thresholded.
    let candidates: Vec<usize> = (0..m).filter(|&i| l1[i] > t).collect();
    let mut states: Vec<ColumnState> = candidates
        .iter()
        .map(|&i| ColumnState::new(strategy, (0..n).map(|r| v.get(r, i).abs())))
        .collect();
    let mut in_active = vec![true; candidates.len()];

    let max_iterations = m + m * n + 2;
    let mut t_history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > max_iterations {
            return Err(Error::Internal(format!(
                "active sets did not stabilize within {max_iterations} iterations"
            )));
        }
        t_history.push(t);

        let mut changed = iterations == 1;
        let mut weighted = 0.0;
        let mut weights = 0.0;
        for (slot, &col) in candidates.iter().enumerate() {
            let active = t < l1[col];
            if active != in_active[slot] {
                in_active[slot] = active;
                changed = true;
            }
            if !active {
                continue;
            }
            let state = &mut states[slot];
            changed |= state.advance(t);
            let k = state.count() as f64;
            weighted += state.support_sum() / k;
            weights += 1.0 / k;
        }
        if weights == 0.0 {
            return Err(Error::Internal(format!(
                "no column above t = {t} although the prox is non-zero"
            )));
        }
        if !changed {
            break;
        }

        let next = (weighted - lambda) / weights;
        if next >= t {
            t = next;
        } else if t - next > T_DECREASE_TOL * t.max(1.0) {
            return Err(Error::Internal(format!(
                "t decreased from {t} to {next} at iteration {iterations}"
            )));
        }
    }

    let mut x_star = v.clone();
    let mut mu = vec![0.0; m];
    let mut thresholds = vec![0.0; m];
    let mut active_cols = Vec::new();
    let mut supports = Vec::new();
    for (slot, &col) in candidates.iter().enumerate() {
        if !in_active[slot] {
            continue;
        }
        let theta = states[slot].threshold(t);
        for r in 0..n {
            x_star.set(r, col, shrink(v.get(r, col), theta));
        }
        thresholds[col] = theta;
        mu[col] = theta / lambda;
        active_cols.push(col);
        supports.push(states[slot].support());
    }

    Ok(ProxSolution {
        x_star,
        t_star: t,
        mu,
        thresholds,
        active_cols,
        supports,
        iterations,
        t_history,
        initial_bound: bound,
    })
}

/// Solution when `‖V‖∞,1 ≤ λ`. The multipliers are the smallest ones that
/// zero each column, `μᵢ = ‖vᵢ‖∞ / λ`.
fn zero_solution(v: &DenseMatrix, lambda: f64, l1: &[f64], maxes: &[f64]) -> ProxSolution {
    let (n, m) = v.shape();
    let active_cols: Vec<usize> = (0..m).filter(|&i| l1[i] > 0.0).collect();
    let supports = active_cols
        .iter()
        .map(|&i| (0..n).filter(|&r| v.get(r, i).abs() >= maxes[i]).collect())
        .collect();
    ProxSolution {
        x_star: DenseMatrix::from_parts(n, m, vec![0.0; n * m]),
        t_star: 0.0,
        mu: maxes.iter().map(|&x| x / lambda).collect(),
        thresholds: maxes.to_vec(),
        active_cols,
        supports,
        iterations: 0,
        t_history: Vec::new(),
        initial_bound: LowerBound {
            value: 0.0,
            provenance: BoundKind::ZeroClamp,
        },
    }
}

/// Projection onto the ℓ∞,1 ball together with the prox solution it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub projected: DenseMatrix,
    pub solution: ProxSolution,
}

/// Euclidean projection of `V` onto `{X : ‖X‖∞,1 ≤ τ}`, obtained from the prox
/// of the dual norm: each entry is clipped to `τμᵢ` in magnitude.
pub fn project_linf1(v: &DenseMatrix, tau: f64, strategy: InnerProjection) -> Result<DenseMatrix> {
    project_linf1_with_solution(v, tau, strategy).map(|p| p.projected)
}

pub fn project_linf1_with_solution(
    v: &DenseMatrix,
    tau: f64,
    strategy: InnerProjection,
) -> Result<Projection> {
    let solution = prox_l1inf(v, tau, strategy)?;
    let (n, m) = v.shape();
    let mut data = Vec::with_capacity(n * m);
    for r in 0..n {
        for (value, &theta) in v.row(r).iter().zip(&solution.thresholds) {
            data.push(value.abs().min(theta).copysign(*value));
        }
    }
    Ok(Projection {
        projected: DenseMatrix::from_parts(n, m, data),
        solution,
    })
}
