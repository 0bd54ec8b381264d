use l1inf_core::bounds::{lower_bound_global, maximize_lower_bound};
use l1inf_core::oracle::{oracle_prox_bisection, oracle_prox_enumerate};
use l1inf_core::rng::Stream;
use l1inf_core::{
    mixed_norm_1inf, mixed_norm_inf1, project_linf1, prox_l1inf, soft_threshold, DenseMatrix,
    InnerProjection,
};
use proptest::prelude::*;

fn random_matrix(rng: &mut Stream, n: usize, m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, m, |_, _| rng.uniform(-1.0, 1.0)).unwrap()
}

/// λ log-uniform between `lo` and `hi`.
fn log_uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.unit() * (hi.ln() - lo.ln())).exp()
}

#[test]
fn kkt_conditions_on_random_matrices() {
    let mut rng = Stream::new(11);
    for trial in 0..200 {
        let n = 1 + rng.index(60);
        let m = 1 + rng.index(60);
        let v = random_matrix(&mut rng, n, m);
        let lambda = log_uniform(&mut rng, 1e-3, 2.0 * mixed_norm_inf1(&v));
        for strategy in InnerProjection::ALL {
            let sol = prox_l1inf(&v, lambda, strategy).unwrap();
            let x = &sol.x_star;
            for r in 0..n {
                for c in 0..m {
                    let (a, b) = (x.get(r, c), v.get(r, c));
                    assert!(a.abs() <= b.abs());
                    if a != 0.0 {
                        assert_eq!(a.signum(), b.signum());
                    }
                }
            }
            if x.is_zero() {
                assert!(mixed_norm_inf1(&v) <= lambda, "trial {trial}");
                continue;
            }
            let mu_sum: f64 = sol.mu.iter().sum();
            assert!((mu_sum - 1.0).abs() <= 1e-10, "trial {trial}: Σμ = {mu_sum}");
            for c in 0..m {
                if !sol.active_cols.contains(&c) {
                    assert_eq!(sol.mu[c], 0.0);
                    assert_eq!(x.column(c), v.column(c));
                }
            }
            assert!((mixed_norm_1inf(x) - sol.t_star).abs() <= 1e-10);
            for &c in &sol.active_cols {
                let l1: f64 = x.column(c).iter().map(|a| a.abs()).sum();
                assert!((l1 - sol.t_star).abs() <= 1e-10);
            }
            let b1 = maximize_lower_bound(&v, lambda).unwrap().value;
            let b2 = lower_bound_global(&v, lambda).unwrap().value;
            assert!(b1 <= sol.t_star + 1e-12 && b2 <= sol.t_star + 1e-12);
            assert!(sol.t_history.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*sol.t_history.last().unwrap(), sol.t_star);
        }
    }
}

#[test]
fn moreau_identity_and_idempotence() {
    let mut rng = Stream::new(12);
    for _ in 0..100 {
        let n = 1 + rng.index(80);
        let m = 1 + rng.index(80);
        let v = random_matrix(&mut rng, n, m);
        let tau = log_uniform(&mut rng, 1e-3, 1.5 * mixed_norm_inf1(&v));
        let strategy = InnerProjection::ALL[rng.index(2)];
        let x = prox_l1inf(&v, tau, strategy).unwrap().x_star;
        let p = project_linf1(&v, tau, strategy).unwrap();
        for ((a, b), c) in x.data().iter().zip(p.data()).zip(v.data()) {
            assert!((a + b - c).abs() <= 1e-12);
        }
        assert!(mixed_norm_inf1(&p) <= tau * (1.0 + 1e-12));
        if mixed_norm_inf1(&v) >= tau {
            assert!((mixed_norm_inf1(&p) - tau).abs() <= 1e-12 * tau.max(1.0));
        }
        let pp = project_linf1(&p, tau, strategy).unwrap();
        assert!(pp.max_abs_diff(&p) <= 1e-12, "{} {} {n}x{m} {}", pp.max_abs_diff(&p), tau, mixed_norm_inf1(&p) - tau);
    }
}

#[test]
fn matches_both_oracles_on_small_matrices() {
    let mut rng = Stream::new(13);
    for trial in 0..300 {
        let n = 1 + rng.index(4);
        let m = 1 + rng.index(4);
        let v = random_matrix(&mut rng, n, m);
        let lambda = log_uniform(&mut rng, 1e-3, 10.0);
        let enumerated = oracle_prox_enumerate(&v, lambda).unwrap();
        let bisected = oracle_prox_bisection(&v, lambda, 1e-13).unwrap();
        assert!(enumerated.x_star.max_abs_diff(&bisected.x_star) <= 1e-8, "trial {trial}");
        for strategy in InnerProjection::ALL {
            let sol = prox_l1inf(&v, lambda, strategy).unwrap();
            assert!(sol.x_star.max_abs_diff(&enumerated.x_star) <= 1e-10, "trial {trial}");
            assert!(sol.x_star.max_abs_diff(&bisected.x_star) <= 1e-8, "trial {trial}");
            if !sol.x_star.is_zero() {
                assert_eq!(sol.active_cols, enumerated.active_cols, "trial {trial}");
                assert_eq!(sol.supports, enumerated.supports, "trial {trial}");
            }
        }
    }
}

#[test]
fn single_column_reduces_to_soft_thresholding() {
    let mut rng = Stream::new(14);
    for _ in 0..300 {
        let n = 1 + rng.index(50);
        let v: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let lambda = log_uniform(&mut rng, 1e-3, 1.0);
        let col = DenseMatrix::new(n, 1, v.clone()).unwrap();
        let expected = soft_threshold(&v, lambda).unwrap();
        for strategy in InnerProjection::ALL {
            let got = prox_l1inf(&col, lambda, strategy).unwrap().x_star.into_data();
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn limits_in_lambda() {
    let mut rng = Stream::new(15);
    let v = random_matrix(&mut rng, 30, 20);
    let tiny = prox_l1inf(&v, 1e-10, InnerProjection::Sort).unwrap();
    assert!(tiny.x_star.max_abs_diff(&v) <= 1e-9);
    let norm = mixed_norm_inf1(&v);
    for lambda in [norm, 1.0001 * norm, 10.0 * norm] {
        let sol = prox_l1inf(&v, lambda, InnerProjection::Michelot).unwrap();
        assert!(sol.x_star.data().iter().all(|&a| a == 0.0));
    }
}

#[test]
fn bounds_prune_columns_on_wide_matrices() {
    // With a small λ most columns sit below the bound and never enter the loop.
    let mut rng = Stream::new(16);
    let v = random_matrix(&mut rng, 50, 400);
    let sol = prox_l1inf(&v, 0.05, InnerProjection::Michelot).unwrap();
    assert!(sol.active_cols.len() < 40);
    assert!(sol.initial_bound.value > 0.0);
}

fn frobenius(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prox_is_nonexpansive(
        n in 1usize..8,
        m in 1usize..8,
        seed in any::<u64>(),
        lambda in 1e-3f64..3.0,
    ) {
        let mut rng = Stream::new(seed);
        let a = random_matrix(&mut rng, n, m);
        let b = random_matrix(&mut rng, n, m);
        let pa = prox_l1inf(&a, lambda, InnerProjection::Sort).unwrap().x_star;
        let pb = prox_l1inf(&b, lambda, InnerProjection::Michelot).unwrap().x_star;
        prop_assert!(frobenius(&pa, &pb) <= frobenius(&a, &b) + 1e-12);
    }

    #[test]
    fn strategies_agree(n in 1usize..40, m in 1usize..40, seed in any::<u64>(), frac in 0.001f64..1.0) {
        let mut rng = Stream::new(seed);
        let v = random_matrix(&mut rng, n, m);
        let lambda = frac * mixed_norm_inf1(&v);
        let a = prox_l1inf(&v, lambda, InnerProjection::Sort).unwrap();
        let b = prox_l1inf(&v, lambda, InnerProjection::Michelot).unwrap();
        prop_assert!(a.x_star.max_abs_diff(&b.x_star) <= 1e-12);
        prop_assert_eq!(a.active_cols, b.active_cols);
    }
}
