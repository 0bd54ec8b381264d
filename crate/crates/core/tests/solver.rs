use l1inf_core::rng::Stream;
use l1inf_core::solver::{
    accuracy, classify, gradient, objective, pgd_fit, pgd_fit_from, planted_classification,
    planted_regression, rank_features, MultiTaskProblem, SolverConfig, StepRule,
};
use l1inf_core::{mixed_norm_inf1, DenseMatrix};

fn frob(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn planted_regression_is_recovered() {
    let planted = planted_regression(7, 200, 50, 3, 5).unwrap();
    let fit = pgd_fit(&planted.problem, &SolverConfig::default()).unwrap();
    assert!(fit.converged);
    assert!(frob(&fit.w, &planted.w_true) <= 1e-4, "error {}", frob(&fit.w, &planted.w_true));
    let predicted = classify(&planted.problem.x, &fit.w).unwrap();
    assert_eq!(accuracy(&predicted, &planted.labels), 1.0);
    let mut top: Vec<usize> = fit.feature_ranking[..5].to_vec();
    top.sort_unstable();
    assert_eq!(top, planted.support);
}

#[test]
fn objective_never_increases_with_fixed_step() {
    let planted = planted_regression(8, 120, 30, 4, 6).unwrap();
    // A tighter budget than the truth so the constraint stays active.
    let problem = MultiTaskProblem { tau: 0.5 * planted.problem.tau, ..planted.problem };
    let config = SolverConfig { max_iters: 2000, ..SolverConfig::default() };
    let fit = pgd_fit(&problem, &config).unwrap();
    let h = &fit.objective_history;
    assert_eq!(h.len(), fit.iterations + 1);
    for w in h.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-15), "{} -> {}", w[0], w[1]);
    }
    assert!(mixed_norm_inf1(&fit.w) <= problem.tau + 1e-9);
}

#[test]
fn every_iterate_is_feasible() {
    let planted = planted_regression(9, 80, 20, 2, 4).unwrap();
    let problem = MultiTaskProblem { tau: 0.3 * planted.problem.tau, ..planted.problem };
    let mut w = DenseMatrix::zeros(2, 20).unwrap();
    let one = SolverConfig { max_iters: 1, ..SolverConfig::default() };
    for _ in 0..50 {
        w = pgd_fit_from(&problem, &one, &w).unwrap().w;
        assert!(mixed_norm_inf1(&w) <= problem.tau + 1e-9);
    }
}

#[test]
fn large_budget_gives_least_squares() {
    let mut rng = Stream::new(30);
    let x = DenseMatrix::from_fn(60, 8, |_, _| rng.normal()).unwrap();
    let y = DenseMatrix::from_fn(60, 2, |_, _| rng.normal()).unwrap();
    let problem = MultiTaskProblem::new(x.clone(), y.clone(), 1e6).unwrap();
    let fit = pgd_fit(&problem, &SolverConfig::default()).unwrap();
    // Normal equations: the gradient of the unconstrained objective vanishes.
    let g = gradient(&problem, &fit.w);
    assert!(g.data().iter().all(|v| v.abs() < 1e-6));
    // Least-squares solution via normal equations solved column by column with Gaussian elimination.
    let xtx = x.transpose_matmul(&x);
    let xty = x.transpose_matmul(&y);
    for task in 0..2 {
        let sol = solve(&xtx, &xty.column(task));
        for (f, s) in sol.iter().enumerate() {
            assert!((fit.w.get(task, f) - s).abs() < 1e-6);
        }
    }
}

fn solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = (0..n).map(|r| {
        let mut row = a.row(r).to_vec();
        row.push(b[r]);
        row
    }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let pivot = m[c].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != c {
                let f = row[c] / pivot[c];
                for (a, b) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *a -= f * b;
                }
            }
        }
    }
    (0..n).map(|r| m[r][n] / m[r][r]).collect()
}

#[test]
fn tiny_budget_collapses_to_zero() {
    let planted = planted_regression(10, 50, 10, 2, 3).unwrap();
    let y_norm: f64 = planted.problem.y.data().iter().map(|v| v * v).sum();
    let problem = MultiTaskProblem { tau: 1e-9, ..planted.problem };
    let fit = pgd_fit(&problem, &SolverConfig::default()).unwrap();
    assert!(fit.w.data().iter().all(|v| v.abs() <= 1e-9));
    assert!((fit.objective - y_norm).abs() <= 1e-6 * y_norm);
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = Stream::new(31);
    for _ in 0..10 {
        let (p, m, n) = (5 + rng.index(10), 2 + rng.index(5), 1 + rng.index(3));
        let x = DenseMatrix::from_fn(p, m, |_, _| rng.normal()).unwrap();
        let y = DenseMatrix::from_fn(p, n, |_, _| rng.normal()).unwrap();
        let w = DenseMatrix::from_fn(n, m, |_, _| rng.normal()).unwrap();
        let problem = MultiTaskProblem::new(x, y, 1.0).unwrap();
        let g = gradient(&problem, &w);
        let h = 1e-6;
        for r in 0..n {
            for c in 0..m {
                let bump = |d: f64| {
                    DenseMatrix::from_fn(n, m, |i, j| w.get(i, j) + if (i, j) == (r, c) { d } else { 0.0 }).unwrap()
                };
                let fd = (objective(&problem, &bump(h)) - objective(&problem, &bump(-h))) / (2.0 * h);
                let exact = g.get(r, c);
                assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{fd} vs {exact}");
            }
        }
    }
}

#[test]
fn optimum_is_a_fixed_point() {
    let planted = planted_regression(11, 100, 25, 3, 4).unwrap();
    let problem = MultiTaskProblem { tau: 0.6 * planted.problem.tau, ..planted.problem };
    let config = SolverConfig { grad_tol: 1e-10, ..SolverConfig::default() };
    let optimum = pgd_fit(&problem, &config).unwrap();
    assert!(optimum.converged);
    let one = SolverConfig { max_iters: 1, ..SolverConfig::default() };
    let next = pgd_fit_from(&problem, &one, &optimum.w).unwrap();
    assert!(next.gradient_mapping < SolverConfig::default().grad_tol);
}

#[test]
fn backtracking_reaches_same_solution() {
    let planted = planted_regression(12, 100, 20, 2, 4).unwrap();
    let problem = MultiTaskProblem { tau: 0.5 * planted.problem.tau, ..planted.problem };
    let fixed = pgd_fit(&problem, &SolverConfig::default()).unwrap();
    let config = SolverConfig { step_rule: StepRule::Backtracking, ..SolverConfig::default() };
    let bt = pgd_fit(&problem, &config).unwrap();
    assert!(bt.converged);
    assert!(frob(&fixed.w, &bt.w) < 1e-6);
    assert!(bt.objective_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-15)));
}

#[test]
fn planted_classification_selects_indicator_features() {
    let planted = planted_classification(3, 200, 50, 5).unwrap();
    let fit = pgd_fit(&planted.problem, &SolverConfig::default()).unwrap();
    let mut top: Vec<usize> = rank_features(&fit.w)[..5].to_vec();
    top.sort_unstable();
    assert_eq!(top, planted.support);
    let predicted = classify(&planted.problem.x, &fit.w).unwrap();
    assert_eq!(accuracy(&predicted, &planted.labels), 1.0);
}

#[test]
fn single_class_predicts_zero() {
    let mut rng = Stream::new(32);
    let x = DenseMatrix::from_fn(30, 6, |_, _| rng.normal()).unwrap();
    let labels = vec![0; 30];
    let problem = MultiTaskProblem::from_labels(x.clone(), &labels, 1, 0.5).unwrap();
    let fit = pgd_fit(&problem, &SolverConfig::default()).unwrap();
    assert!(mixed_norm_inf1(&fit.w) <= 0.5 + 1e-9);
    assert!(classify(&x, &fit.w).unwrap().iter().all(|&c| c == 0));
}
