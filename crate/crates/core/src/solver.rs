//! Projected gradient descent for multi-task least squares under an ℓ∞,1
//! budget:
//!
//! ```text
//! minimize ‖Y − X Wᵀ‖²_F   subject to   ‖W‖∞,1 ≤ τ
//! ```
//!
//! `X` is `p × m` (samples × features), `Y` is `p × n` (samples × tasks) and
//! `W` is `n × m`. The ℓ∞ groups are the columns of `W`, one per feature, so
//! the constraint drives whole features to zero across all tasks.

use crate::error::{Error, Result};
use crate::l1ball::InnerProjection;
use crate::matrix::DenseMatrix;
use crate::norms::mixed_norm_inf1;
use crate::prox::project_linf1;
use crate::rng::Stream;

const POWER_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTaskProblem {
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub tau: f64,
}

impl MultiTaskProblem {
    pub fn new(x: DenseMatrix, y: DenseMatrix, tau: f64) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::invalid(format!(
                "data has {} samples but targets have {}",
                x.rows(),
                y.rows()
            )));
        }
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::invalid(format!("tau must be finite and positive, got {tau}")));
        }
        Ok(Self { x, y, tau })
    }

    /// Classification problem with one-hot targets.
    pub fn from_labels(x: DenseMatrix, labels: &[usize], n_classes: usize, tau: f64) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::invalid(format!(
                "{} labels for {} samples",
                labels.len(),
                x.rows()
            )));
        }
        Self::new(x, one_hot_encode(labels, n_classes)?, tau)
    }

    pub fn n_tasks(&self) -> usize {
        self.y.cols()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    fn check_weights(&self, w: &DenseMatrix) -> Result<()> {
        if w.shape() != (self.n_tasks(), self.n_features()) {
            return Err(Error::invalid(format!(
                "weights are {}x{}, expected {}x{}",
                w.rows(),
                w.cols(),
                self.n_tasks(),
                self.n_features()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `η = 1/L` with `L = 2σ_max(X)²`.
    FixedInverseLipschitz,
    /// Start from the previous step and halve until the quadratic upper bound holds.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Stop once `‖W_k − W_{k+1}‖_F / η` drops to this value.
    pub grad_tol: f64,
    /// Record the objective after every iteration.
    pub history: bool,
    pub strategy: InnerProjection,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            step_rule: StepRule::FixedInverseLipschitz,
            grad_tol: 1e-8,
            history: true,
            strategy: InnerProjection::Sort,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !self.grad_tol.is_finite() || self.grad_tol <= 0.0 {
            return Err(Error::invalid(format!(
                "grad_tol must be finite and positive, got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub w: DenseMatrix,
    /// Objective at the starting point and after each iteration, if requested.
    pub objective_history: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Gradient-mapping norm at the last iteration.
    pub gradient_mapping: f64,
    pub step_size: f64,
    pub feature_ranking: Vec<usize>,
}

/// `‖Y − X Wᵀ‖²_F`.
pub fn objective(problem: &MultiTaskProblem, w: &DenseMatrix) -> f64 {
    residual(problem, w).data().iter().map(|r| r * r).sum()
}

fn residual(problem: &MultiTaskProblem, w: &DenseMatrix) -> DenseMatrix {
    let mut r = problem.x.matmul_transposed(w);
    for (ri, yi) in r.data_mut().iter_mut().zip(problem.y.data()) {
        *ri = yi - *ri;
    }
    r
}

/// `∇J(W) = −2 (Y − X Wᵀ)ᵀ X`.
pub fn gradient(problem: &MultiTaskProblem, w: &DenseMatrix) -> DenseMatrix {
    let mut g = residual(problem, w).transpose_matmul(&problem.x);
    g.data_mut().iter_mut().for_each(|v| *v *= -2.0);
    g
}

/// `2σ_max(X)²`, with `σ_max` from power iteration on `XᵀX`.
pub fn lipschitz_constant(x: &DenseMatrix) -> f64 {
    let m = x.cols();
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let xv: Vec<f64> = (0..x.rows())
            .map(|r| x.row(r).iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let mut next = vec![0.0; m];
        for (r, &s) in xv.iter().enumerate() {
            for (n, a) in next.iter_mut().zip(x.row(r)) {
                *n += a * s;
            }
        }
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        estimate = xv.iter().map(|a| a * a).sum::<f64>();
        if norm == 0.0 {
            break;
        }
        v = next.into_iter().map(|a| a / norm).collect();
    }
    2.0 * estimate
}

pub fn pgd_fit(problem: &MultiTaskProblem, config: &SolverConfig) -> Result<FitResult> {
    let w0 = DenseMatrix::zeros(problem.n_tasks(), problem.n_features())?;
    pgd_fit_from(problem, config, &w0)
}

/// Same as [`pgd_fit`] starting from `w0` (projected first if infeasible).
pub fn pgd_fit_from(problem: &MultiTaskProblem, config: &SolverConfig, w0: &DenseMatrix) -> Result<FitResult> {
    config.validate()?;
    problem.check_weights(w0)?;
    let tau = problem.tau;
    let project = |z: &DenseMatrix| project_linf1(z, tau, config.strategy);

    let mut w = if mixed_norm_inf1(w0) > tau { project(w0)? } else { w0.clone() };
    let mut value = objective(problem, &w);
    if !value.is_finite() {
        return Err(Error::Divergence {
            iteration: 0,
            message: "objective is not finite at the starting point".into(),
        });
    }
    let mut history = if config.history { vec![value] } else { Vec::new() };

    let lipschitz = lipschitz_constant(&problem.x);
    let mut eta = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };
    let mut iterations = 0;
    let mut converged = false;
    let mut gradient_mapping = f64::INFINITY;

    while iterations < config.max_iters {
        iterations += 1;
        let g = gradient(problem, &w);
        let (next, next_value) = match config.step_rule {
            StepRule::FixedInverseLipschitz => {
                let next = project(&step(&w, &g, eta))?;
                let v = objective(problem, &next);
                (next, v)
            }
            StepRule::Backtracking => backtrack(problem, &w, value, &g, &mut eta, &project, iterations)?,
        };
        if !next_value.is_finite() {
            return Err(Error::Divergence {
                iteration: iterations,
                message: format!("objective became {next_value}"),
            });
        }
        gradient_mapping = frobenius_diff(&next, &w) / eta;
        w = next;
        value = next_value;
        if config.history {
            history.push(value);
        }
        if gradient_mapping <= config.grad_tol {
            converged = true;
            break;
        }
    }

    let feature_ranking = rank_features(&w);
    Ok(FitResult {
        w,
        objective_history: history,
        objective: value,
        iterations,
        converged,
        gradient_mapping,
        step_size: eta,
        feature_ranking,
    })
}

fn step(w: &DenseMatrix, g: &DenseMatrix, eta: f64) -> DenseMatrix {
    let data = w.data().iter().zip(g.data()).map(|(a, b)| a - eta * b).collect();
    DenseMatrix::from_parts(w.rows(), w.cols(), data)
}

fn frobenius_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn backtrack(
    problem: &MultiTaskProblem,
    w: &DenseMatrix,
    value: f64,
    g: &DenseMatrix,
    eta: &mut f64,
    project: &impl Fn(&DenseMatrix) -> Result<DenseMatrix>,
    iteration: usize,
) -> Result<(DenseMatrix, f64)> {
    for _ in 0..MAX_HALVINGS {
        let next = project(&step(w, g, *eta))?;
        let next_value = objective(problem, &next);
        let mut linear = 0.0;
        let mut quadratic = 0.0;
        for ((a, b), gi) in next.data().iter().zip(w.data()).zip(g.data()) {
            let d = a - b;
            linear += gi * d;
            quadratic += d * d;
        }
        if next_value.is_finite() && next_value <= value + linear + quadratic / (2.0 * *eta) {
            return Ok((next, next_value));
        }
        *eta *= 0.5;
    }
    Err(Error::Divergence {
        iteration,
        message: format!("no sufficient decrease after {MAX_HALVINGS} step halvings"),
    })
}

pub fn one_hot_encode(labels: &[usize], n_classes: usize) -> Result<DenseMatrix> {
    if n_classes == 0 {
        return Err(Error::invalid("number of classes must be positive"));
    }
    if labels.is_empty() {
        return Err(Error::invalid("no labels"));
    }
    if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= n_classes) {
        return Err(Error::invalid(format!(
            "label {l} at position {i} is outside 0..{n_classes}"
        )));
    }
    DenseMatrix::from_fn(labels.len(), n_classes, |r, c| if labels[r] == c { 1.0 } else { 0.0 })
}

/// Predicted class per sample: the task with the largest score in `X Wᵀ`,
/// lowest index on ties.
pub fn classify(x: &DenseMatrix, w: &DenseMatrix) -> Result<Vec<usize>> {
    if x.cols() != w.cols() {
        return Err(Error::invalid(format!(
            "data has {} features but weights have {}",
            x.cols(),
            w.cols()
        )));
    }
    let scores = x.matmul_transposed(w);
    Ok((0..scores.rows())
        .map(|r| {
            let row = scores.row(r);
            let mut best = 0;
            for (j, &s) in row.iter().enumerate().skip(1) {
                if s > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect())
}

/// Feature indices by decreasing ℓ₂ norm of the matching column of `w`,
/// ascending index on ties.
pub fn rank_features(w: &DenseMatrix) -> Vec<usize> {
    let mut norms = vec![0.0; w.cols()];
    for r in 0..w.rows() {
        for (acc, v) in norms.iter_mut().zip(w.row(r)) {
            *acc += v * v;
        }
    }
    let mut order: Vec<usize> = (0..w.cols()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order
}

pub fn accuracy(predicted: &[usize], labels: &[usize]) -> f64 {
    assert_eq!(predicted.len(), labels.len());
    let hits = predicted.iter().zip(labels).filter(|(a, b)| a == b).count();
    hits as f64 / labels.len() as f64
}

/// Per-feature centering and scaling learned from a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    /// Population standard deviations. Zero-variance features keep scale 1
    /// and are only centered.
    pub scales: Vec<f64>,
}

impl Standardization {
    pub fn fit(x: &DenseMatrix) -> Self {
        let p = x.rows() as f64;
        let mut means = vec![0.0; x.cols()];
        for r in 0..x.rows() {
            for (m, v) in means.iter_mut().zip(x.row(r)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= p);
        let mut vars = vec![0.0; x.cols()];
        for r in 0..x.rows() {
            for ((s, v), m) in vars.iter_mut().zip(x.row(r)).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let scales = vars
            .into_iter()
            .map(|s| {
                let sd = (s / p).sqrt();
                if sd > 0.0 { sd } else { 1.0 }
            })
            .collect();
        Self { means, scales }
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.means.len() {
            return Err(Error::invalid(format!(
                "expected {} features, got {}",
                self.means.len(),
                x.cols()
            )));
        }
        DenseMatrix::from_fn(x.rows(), x.cols(), |r, c| (x.get(r, c) - self.means[c]) / self.scales[c])
    }
}

pub fn standardize(x: &DenseMatrix) -> (DenseMatrix, Standardization) {
    let s = Standardization::fit(x);
    let out = s.apply(x).expect("same feature count");
    (out, s)
}

/// Synthetic instance with a known sparse solution.
#[derive(Debug, Clone)]
pub struct Planted {
    pub problem: MultiTaskProblem,
    pub w_true: DenseMatrix,
    /// Features with non-zero weight, ascending.
    pub support: Vec<usize>,
    /// `argmax` of each row of the noiseless targets.
    pub labels: Vec<usize>,
}

fn choose_support(rng: &mut Stream, m: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..m).collect();
    for i in 0..k {
        let j = i + rng.index(m - i);
        pool.swap(i, j);
    }
    let mut support = pool[..k].to_vec();
    support.sort_unstable();
    support
}

/// Gaussian `p × m` design, `n_tasks × m` weights with `k` non-zero feature
/// columns (magnitudes in `[1, 2)`, random signs), `Y = X W_trueᵀ` and
/// `τ = ‖W_true‖∞,1`.
pub fn planted_regression(seed: u64, p: usize, m: usize, n_tasks: usize, k: usize) -> Result<Planted> {
    if k == 0 || k > m || n_tasks == 0 {
        return Err(Error::invalid(format!(
            "support size {k} must be in 1..={m}, with at least one task"
        )));
    }
    let mut rng = Stream::new(seed);
    let x = DenseMatrix::from_fn(p, m, |_, _| rng.normal())?;
    let support = choose_support(&mut rng, m, k);
    let mut w = vec![0.0; n_tasks * m];
    for t in 0..n_tasks {
        for &f in &support {
            let sign = if rng.unit() < 0.5 { -1.0 } else { 1.0 };
            w[t * m + f] = sign * rng.uniform(1.0, 2.0);
        }
    }
    let w_true = DenseMatrix::new(n_tasks, m, w)?;
    let y = x.matmul_transposed(&w_true);
    let labels = classify(&x, &w_true)?;
    let tau = mixed_norm_inf1(&w_true);
    Ok(Planted {
        problem: MultiTaskProblem::new(x, y, tau)?,
        w_true,
        support,
        labels,
    })
}

/// Classification instance whose one-hot targets are exactly linear in the
/// data: `n_classes` planted features are class indicators, the rest are
/// Gaussian noise. `W_true` holds a single 1 per class and `τ = n_classes`.
pub fn planted_classification(seed: u64, p: usize, m: usize, n_classes: usize) -> Result<Planted> {
    if n_classes == 0 || n_classes > m || p < n_classes {
        return Err(Error::invalid(format!(
            "need 1 <= classes ({n_classes}) <= features ({m}) and samples ({p}) >= classes"
        )));
    }
    let mut rng = Stream::new(seed);
    let mut labels: Vec<usize> = (0..p).map(|i| i % n_classes).collect();
    for i in (1..p).rev() {
        let j = rng.index(i + 1);
        labels.swap(i, j);
    }
    let support = choose_support(&mut rng, m, n_classes);
    let mut data = vec![0.0; p * m];
    for r in 0..p {
        for c in 0..m {
            data[r * m + c] = match support.binary_search(&c) {
                Ok(class) => f64::from(u8::from(labels[r] == class)),
                Err(_) => rng.normal(),
            };
        }
    }
    let x = DenseMatrix::new(p, m, data)?;
    let w_true = DenseMatrix::from_fn(n_classes, m, |t, f| if support.get(t) == Some(&f) { 1.0 } else { 0.0 })?;
    let problem = MultiTaskProblem::from_labels(x, &labels, n_classes, n_classes as f64)?;
    Ok(Planted {
        problem,
        w_true,
        support,
        labels,
    })
}
