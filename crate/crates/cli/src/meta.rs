//! JSON run metadata.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub provenance: &'static str,
}

/// Emitted by `prox` and `project`.
#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub subcommand: &'static str,
    pub strategy: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub t_star: f64,
    pub iterations: usize,
    pub lower_bound_used: BoundReport,
    pub active_columns: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub tau: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    pub gradient_mapping: f64,
    pub training_accuracy: f64,
    /// Features whose weight column reaches `support_tol` times the largest one.
    pub support: Vec<usize>,
    pub elapsed_seconds: f64,
}

/// Emitted by `fit`. `selected` indexes into `fits`.
#[derive(Debug, Serialize)]
pub struct FitMetadata {
    pub command: String,
    pub subcommand: &'static str,
    pub strategy: &'static str,
    pub standardize: bool,
    pub support_tol: f64,
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub fits: Vec<FitReport>,
    pub selected: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planted_support: Option<Vec<usize>>,
    pub elapsed_seconds: f64,
}

/// Writes pretty JSON to `path`, or to standard error when `path` is `None`.
pub fn emit<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Invalid(format!("cannot serialize metadata: {e}")))?;
    match path {
        Some(p) => std::fs::write(p, json + "\n").map_err(|e| CliError::io(p, e)),
        None => {
            let mut err = std::io::stderr().lock();
            writeln!(err, "{json}").map_err(|e| CliError::io("<stderr>", e))
        }
    }
}

pub fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}
