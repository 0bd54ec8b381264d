//! Slow reference solvers for the ℓ₁,∞ prox, kept independent of the
//! iterative solver in [`crate::prox`] so they can check it.
//!
//! * [`oracle_prox_bisection`] bisects on the optimal norm `t`. For a fixed
//!   `t` every column is projected onto the ℓ₁ ball of radius `t` on its own,
//!   giving thresholds `θᵢ(t)`; their sum `φ(t) = Σθᵢ(t)/λ` is non-increasing
//!   and equals one at the optimum.
//! * [`oracle_prox_enumerate`] tries every choice of thresholded columns and
//!   per-column supports, solves the optimality conditions in closed form for
//!   each choice, and keeps the feasible candidate with the lowest objective.
//!   Exponential in `n·m`, so limited to 16 entries.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Largest matrix (in entries) accepted by the enumeration oracle.
pub const ENUMERATION_BUDGET: usize = 16;

const BISECTION_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub x_star: DenseMatrix,
    pub t_star: f64,
    /// Largest violation of the optimality conditions at the returned point.
    pub residual: f64,
    pub mu: Vec<f64>,
    pub active_cols: Vec<usize>,
    pub supports: Vec<Vec<usize>>,
}

fn check_common(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda must be finite and positive, got {lambda}")))
    }
}

/// |V| stored column by column.
fn abs_columns(v: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..v.cols())
        .map(|c| v.column(c).into_iter().map(f64::abs).collect())
        .collect()
}

/// Threshold of the projection of `u ≥ 0` onto the ℓ₁ ball of radius `t`:
/// the largest value of `(s_k − t)/k` over prefixes of the sorted entries,
/// or zero when `u` already lies in the ball.
fn ball_threshold(u: &[f64], t: f64) -> f64 {
    let total: f64 = u.iter().sum();
    if total <= t {
        return 0.0;
    }
    let mut sorted = u.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut partial = 0.0;
    let mut best = f64::NEG_INFINITY;
    for (k, x) in sorted.iter().enumerate() {
        partial += x;
        best = best.max((partial - t) / (k + 1) as f64);
    }
    best.max(0.0)
}

/// `φ(t) = Σᵢ θᵢ(t) / λ`: the multiplier sum produced by projecting every
/// column of `|V|` onto the ℓ₁ ball of radius `t`.
pub fn multiplier_sum(v: &DenseMatrix, lambda: f64, t: f64) -> f64 {
    abs_columns(v).iter().map(|u| ball_threshold(u, t)).sum::<f64>() / lambda
}

fn zero_result(v: &DenseMatrix, lambda: f64, cols: &[Vec<f64>]) -> OracleResult {
    let (n, m) = v.shape();
    let maxes: Vec<f64> = cols.iter().map(|u| u.iter().copied().fold(0.0, f64::max)).collect();
    let active_cols: Vec<usize> = (0..m).filter(|&i| maxes[i] > 0.0).collect();
    let supports = active_cols
        .iter()
        .map(|&i| (0..n).filter(|&j| cols[i][j] >= maxes[i]).collect())
        .collect();
    OracleResult {
        x_star: DenseMatrix::zeros(n, m).expect("shape already validated"),
        t_star: 0.0,
        residual: 0.0,
        mu: maxes.iter().map(|x| x / lambda).collect(),
        active_cols,
        supports,
    }
}

/// Max column ℓ₁ norm of a column-major candidate.
fn l1inf_of(cols: &[Vec<f64>]) -> f64 {
    cols.iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn signed_matrix(v: &DenseMatrix, magnitudes: &[Vec<f64>]) -> DenseMatrix {
    DenseMatrix::from_fn(v.rows(), v.cols(), |r, c| magnitudes[c][r].copysign(v.get(r, c)))
        .expect("finite by construction")
}

pub fn oracle_prox_bisection(v: &DenseMatrix, lambda: f64, tol: f64) -> Result<OracleResult> {
    check_common(lambda)?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be finite and positive, got {tol}")));
    }
    let cols = abs_columns(v);
    let inf1: f64 = cols.iter().map(|u| u.iter().copied().fold(0.0, f64::max)).sum();
    if inf1 <= lambda {
        return Ok(zero_result(v, lambda, &cols));
    }
    let phi = |t: f64| cols.iter().map(|u| ball_threshold(u, t)).sum::<f64>() / lambda;

    // φ(0) = ‖V‖∞,1/λ > 1 and φ(max column norm) = 0.
    let mut lo = 0.0;
    let mut hi = l1inf_of(&cols);
    let mut converged = false;
    for _ in 0..BISECTION_MAX_ITERS {
        if hi - lo <= tol {
            converged = true;
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Bracket is down to adjacent floats.
            converged = true;
            break;
        }
        if phi(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged && hi - lo > tol {
        return Err(Error::NoConvergence {
            iterations: BISECTION_MAX_ITERS,
            message: format!("bisection bracket [{lo}, {hi}] wider than {tol}"),
        });
    }

    let t = hi;
    let (n, m) = v.shape();
    let mut magnitudes = Vec::with_capacity(m);
    let mut mu = vec![0.0; m];
    let mut active_cols = Vec::new();
    let mut supports = Vec::new();
    let mut residual = 0.0f64;
    for (i, u) in cols.iter().enumerate() {
        let theta = ball_threshold(u, t);
        let x: Vec<f64> = u.iter().map(|&a| (a - theta).max(0.0)).collect();
        let mass: f64 = x.iter().sum();
        residual = residual.max(mass - t);
        if u.iter().sum::<f64>() > t {
            residual = residual.max((mass - t).abs());
            active_cols.push(i);
            supports.push((0..n).filter(|&j| u[j] >= theta).collect());
            mu[i] = theta / lambda;
        }
        magnitudes.push(x);
    }
    residual = residual.max((mu.iter().sum::<f64>() - 1.0).abs());

    Ok(OracleResult {
        x_star: signed_matrix(v, &magnitudes),
        t_star: t,
        residual,
        mu,
        active_cols,
        supports,
    })
}

/// Per-column choice during enumeration: `None` leaves the column untouched,
/// `Some(mask)` thresholds it with support `mask`.
struct Candidate {
    t: f64,
    objective: f64,
    violation: f64,
    magnitudes: Vec<Vec<f64>>,
    mu: Vec<f64>,
    choice: Vec<Option<u32>>,
}

pub fn oracle_prox_enumerate(v: &DenseMatrix, lambda: f64) -> Result<OracleResult> {
    check_common(lambda)?;
    let (n, m) = v.shape();
    if n * m > ENUMERATION_BUDGET {
        return Err(Error::invalid(format!(
            "{n}x{m} matrix exceeds the enumeration budget of {ENUMERATION_BUDGET} entries"
        )));
    }
    let cols = abs_columns(v);
    let scale = cols.iter().flatten().copied().fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let l1: Vec<f64> = cols.iter().map(|u| u.iter().sum()).collect();
    let maxes: Vec<f64> = cols.iter().map(|u| u.iter().copied().fold(0.0, f64::max)).collect();

    // The zero matrix is optimal iff some μ ≥ 0 with Σμ = 1 has λμᵢ ≥ maxᵢ.
    if maxes.iter().sum::<f64>() <= lambda {
        return Ok(zero_result(v, lambda, &cols));
    }

    let masks = 1u32 << n;
    // Per column and support mask: (sum of entries, cardinality).
    let table: Vec<Vec<(f64, usize)>> = cols
        .iter()
        .map(|u| {
            (0..masks)
                .map(|mask| {
                    let members = (0..n).filter(|j| mask & (1 << j) != 0);
                    members.fold((0.0, 0), |(s, k), j| (s + u[j], k + 1))
                })
                .collect()
        })
        .collect();

    let mut codes = vec![0u32; m];
    let mut best: Option<Candidate> = None;
    let mut tie_gap = 0.0f64;
    // Lexicographic order over code vectors, column 0 most significant.
    for index in 0u64..(1u64 << (n * m)) {
        for (i, code) in codes.iter_mut().enumerate() {
            *code = ((index >> (n * (m - 1 - i))) & (masks as u64 - 1)) as u32;
        }
        let Some(c) = evaluate(&codes, &cols, &l1, &table, lambda, tol) else {
            continue;
        };
        match &best {
            Some(b) if c.objective > b.objective + 1e-12 => {}
            Some(b) if c.objective >= b.objective - 1e-12 => {
                tie_gap = tie_gap.max(max_gap(&c.magnitudes, &b.magnitudes));
            }
            _ => best = Some(c),
        }
    }

    let best = best.ok_or_else(|| Error::Internal("no candidate satisfies the optimality conditions".into()))?;
    let mut active_cols = Vec::new();
    let mut supports = Vec::new();
    for (i, choice) in best.choice.iter().enumerate() {
        if let Some(mask) = choice {
            active_cols.push(i);
            supports.push((0..n).filter(|j| mask & (1 << j) != 0).collect());
        }
    }
    Ok(OracleResult {
        x_star: signed_matrix(v, &best.magnitudes),
        t_star: best.t,
        residual: best.violation.max(tie_gap),
        mu: best.mu,
        active_cols,
        supports,
    })
}

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Closed-form solution for one choice of sets, or `None` when it violates
/// the optimality conditions by more than `tol`.
fn evaluate(
    codes: &[u32],
    cols: &[Vec<f64>],
    l1: &[f64],
    table: &[Vec<(f64, usize)>],
    lambda: f64,
    tol: f64,
) -> Option<Candidate> {
    let m = cols.len();
    let mut weighted = 0.0;
    let mut weights = 0.0;
    for (i, &code) in codes.iter().enumerate() {
        if code != 0 {
            let (s, k) = table[i][code as usize];
            weighted += s / k as f64;
            weights += 1.0 / k as f64;
        }
    }
    if weights == 0.0 {
        // No thresholded column: Σμ = 0 ≠ 1.
        return None;
    }
    let t = (weighted - lambda) / weights;
    if t < -tol {
        return None;
    }

    let mut violation = 0.0f64;
    let mut magnitudes = Vec::with_capacity(m);
    let mut mu = vec![0.0; m];
    let mut choice = Vec::with_capacity(m);
    for i in 0..m {
        let u = &cols[i];
        let code = codes[i];
        if code == 0 {
            // Untouched column must already satisfy the norm constraint.
            if l1[i] > t + tol {
                return None;
            }
            violation = violation.max(l1[i] - t);
            magnitudes.push(u.clone());
            choice.push(None);
            continue;
        }
        if l1[i] <= t - tol {
            return None;
        }
        let (s, k) = table[i][code as usize];
        let theta = (s - t) / k as f64;
        if theta < -tol {
            return None;
        }
        let mut x = vec![0.0; u.len()];
        for (j, &a) in u.iter().enumerate() {
            let slack = a - theta;
            if code & (1 << j) != 0 {
                // Primal feasibility of the kept entry.
                if slack < -tol {
                    return None;
                }
                violation = violation.max(-slack);
                x[j] = slack.max(0.0);
            } else {
                // Dual feasibility of the bound multiplier on a zeroed entry.
                if slack > tol {
                    return None;
                }
                violation = violation.max(slack);
            }
        }
        let mass: f64 = x.iter().sum();
        if (mass - t).abs() > tol {
            return None;
        }
        violation = violation.max((mass - t).abs());
        mu[i] = theta.max(0.0) / lambda;
        magnitudes.push(x);
        choice.push(Some(code));
    }
    violation = violation.max((mu.iter().sum::<f64>() - 1.0).abs());

    let distance: f64 = magnitudes
        .iter()
        .zip(cols)
        .flat_map(|(x, u)| x.iter().zip(u).map(|(a, b)| (a - b) * (a - b)))
        .sum();
    let objective = l1inf_of(&magnitudes) + distance / (2.0 * lambda);
    Some(Candidate {
        t,
        objective,
        violation,
        magnitudes,
        mu,
        choice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m<const C: usize>(rows: &[[f64; C]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn fixtures_agree() {
        let v = m(&[[4.0, 1.0], [2.0, 1.0]]);
        let b = oracle_prox_bisection(&v, 1.0, 1e-10).unwrap();
        assert!((b.t_star - 4.0).abs() <= 1e-10);
        let e = oracle_prox_enumerate(&v, 1.0).unwrap();
        assert!((e.t_star - 4.0).abs() < 1e-14);
        assert_eq!(e.x_star, m(&[[3.0, 1.0], [1.0, 1.0]]));
        assert_eq!(e.active_cols, vec![0]);
        assert_eq!(e.supports, vec![vec![0, 1]]);
        assert!(b.x_star.max_abs_diff(&e.x_star) < 1e-9);

        let w = m(&[[2.0, 2.0], [0.0, 0.0]]);
        let e = oracle_prox_enumerate(&w, 1.0).unwrap();
        assert!((e.t_star - 1.5).abs() < 1e-14);
        assert_eq!(e.x_star, m(&[[1.5, 1.5], [0.0, 0.0]]));
        let b = oracle_prox_bisection(&w, 1.0, 1e-12).unwrap();
        assert!((b.t_star - 1.5).abs() < 1e-11);
    }

    #[test]
    fn scalar_and_zero_cases() {
        let e = oracle_prox_enumerate(&m(&[[5.0]]), 1.0).unwrap();
        assert_eq!(e.x_star, m(&[[4.0]]));
        let v = m(&[[0.3, -0.2], [0.1, 0.4]]);
        let b = oracle_prox_bisection(&v, 0.7, 1e-10).unwrap();
        assert!(b.x_star.is_zero());
        let e = oracle_prox_enumerate(&v, 0.9).unwrap();
        assert!(e.x_star.is_zero());
    }

    #[test]
    fn single_column_soft_thresholds() {
        let v = m(&[[1.5], [-0.25], [0.75], [-2.0]]);
        let b = oracle_prox_bisection(&v, 0.5, 1e-13).unwrap();
        let expected = [1.0, 0.0, 0.25, -1.5];
        for (r, e) in expected.iter().enumerate() {
            assert!((b.x_star.get(r, 0) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let v = m(&[[1.0, 2.0]]);
        assert!(oracle_prox_bisection(&v, 1.0, 0.0).is_err());
        assert!(oracle_prox_bisection(&v, 0.0, 1e-6).is_err());
        let big = DenseMatrix::zeros(5, 4).unwrap();
        assert!(matches!(oracle_prox_enumerate(&big, 1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn phi_is_non_increasing() {
        let v = m(&[[0.4, -0.1, 0.25], [-0.3, 0.45, 0.05], [0.2, 0.2, -0.5]]);
        let top = 1.2;
        let mut prev = f64::INFINITY;
        for k in 0..=600 {
            let phi = multiplier_sum(&v, 0.3, top * k as f64 / 600.0);
            assert!(phi <= prev + 1e-15);
            prev = phi;
        }
        assert_eq!(prev, 0.0);
    }
}
