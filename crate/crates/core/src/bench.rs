//! Timing harness for the ℓ∞,1 projection on random matrices.
//!
//! For each matrix size, radius fraction `α` and strategy, every trial draws
//! a fresh matrix with entries uniform on `[-0.5, 0.5)`, sets
//! `τ = α·‖V‖∞,1` and times one call to [`project_linf1`]. Only the call is
//! timed; generation and the norm used to pick `τ` are not. One untimed
//! warm-up call precedes each configuration.

use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::l1ball::InnerProjection;
use crate::matrix::DenseMatrix;
use crate::norms::mixed_norm_inf1;
use crate::prox::project_linf1;
use crate::rng::Stream;

pub const CSV_HEADER: &str = "n,m,alpha,method,trials,seconds_mean,seconds_std,checksum";

/// Matrix with i.i.d. entries uniform on `[-0.5, 0.5)`, filled row-major from
/// a SplitMix64 stream seeded with `seed`.
pub fn gen_random_matrix(n: usize, m: usize, seed: u64) -> Result<DenseMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::invalid(format!("matrix size must be positive, got {n}x{m}")));
    }
    let mut rng = Stream::new(seed);
    let data = (0..n * m).map(|_| rng.unit() - 0.5).collect();
    DenseMatrix::new(n, m, data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<(usize, usize)>,
    pub alphas: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<InnerProjection>,
    /// Trial `k` uses the matrix generated from `seed + k`.
    pub seed: u64,
}

const GRID_ALPHAS: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

impl BenchConfig {
    /// Desk-scale grid: sizes up to 1000×1000 and 20 trials.
    pub fn desk() -> Self {
        Self {
            sizes: vec![(100, 100), (1000, 100), (100, 1000), (1000, 1000)],
            alphas: GRID_ALPHAS.to_vec(),
            trials: 20,
            methods: InnerProjection::ALL.to_vec(),
            seed: 0,
        }
    }

    /// The full grid of the original timing table, including 10000×1000, with 100 trials.
    pub fn paper_grid() -> Self {
        Self {
            sizes: vec![(100, 100), (1000, 100), (100, 1000), (1000, 1000), (10000, 1000)],
            trials: 100,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.alphas.is_empty() || self.methods.is_empty() {
            return Err(Error::invalid("benchmark grid has an empty axis"));
        }
        if let Some(&(n, m)) = self.sizes.iter().find(|&&(n, m)| n == 0 || m == 0) {
            return Err(Error::invalid(format!("matrix size must be positive, got {n}x{m}")));
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1], got {a}")));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub n_rows: usize,
    pub n_cols: usize,
    pub alpha: f64,
    pub method: InnerProjection,
    pub trials: usize,
    pub seconds_mean: f64,
    /// Sample standard deviation; zero for a single trial.
    pub seconds_std: f64,
    /// Slowest single call. Not part of the CSV output.
    pub seconds_max: f64,
    /// Sum of all entries of every projected matrix, over all trials.
    pub checksum: f64,
}

pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let mut records = Vec::new();
    for &(n, m) in &config.sizes {
        for &alpha in &config.alphas {
            for &method in &config.methods {
                records.push(run_configuration(n, m, alpha, method, config)?);
            }
        }
    }
    Ok(records)
}

fn run_configuration(
    n: usize,
    m: usize,
    alpha: f64,
    method: InnerProjection,
    config: &BenchConfig,
) -> Result<BenchRecord> {
    let warmup = gen_random_matrix(n, m, config.seed)?;
    project_linf1(&warmup, alpha * mixed_norm_inf1(&warmup), method)?;

    let mut times = Vec::with_capacity(config.trials);
    let mut checksum = 0.0;
    for trial in 0..config.trials {
        let v = gen_random_matrix(n, m, config.seed.wrapping_add(trial as u64))?;
        let tau = alpha * mixed_norm_inf1(&v);
        let start = Instant::now();
        let projected = project_linf1(&v, tau, method)?;
        times.push(start.elapsed().as_secs_f64());
        checksum += projected.sum();
    }

    let count = times.len() as f64;
    let mean = times.iter().sum::<f64>() / count;
    let std = if times.len() > 1 {
        (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(BenchRecord {
        n_rows: n,
        n_cols: m,
        alpha,
        method,
        trials: config.trials,
        seconds_mean: mean,
        seconds_std: std,
        seconds_max: times.iter().copied().fold(0.0, f64::max),
        checksum,
    })
}

/// Nine significant digits in scientific notation.
fn sci9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_csv<W: io::Write>(records: &[BenchRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n_rows,
            r.n_cols,
            sci9(r.alpha),
            r.method,
            r.trials,
            sci9(r.seconds_mean),
            sci9(r.seconds_std),
            sci9(r.checksum)
        )?;
    }
    Ok(())
}

/// Plain-text table with one row per (size, α) and one column per method.
pub fn summary_table(records: &[BenchRecord]) -> String {
    let mut methods: Vec<InnerProjection> = Vec::new();
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
        let key = (r.n_rows, r.n_cols, r.alpha);
        if !rows.contains(&key) {
            rows.push(key);
        }
    }
    let mut out = format!("{:>12} {:>10}", "size", "alpha");
    for method in &methods {
        let _ = write!(out, " {:>12}", method.as_str());
    }
    out.push('\n');
    for (n, m, alpha) in rows {
        let _ = write!(out, "{:>12} {:>10.1e}", format!("{n}x{m}"), alpha);
        for method in &methods {
            let cell = records
                .iter()
                .find(|r| (r.n_rows, r.n_cols, r.alpha, r.method) == (n, m, alpha, *method))
                .map_or_else(|| "-".to_string(), |r| format!("{:.2e}", r.seconds_mean));
            let _ = write!(out, " {cell:>12}");
        }
        out.push('\n');
    }
    out
}
