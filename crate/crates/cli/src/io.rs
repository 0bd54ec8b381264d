//! Matrix and label files.
//!
//! Matrices are plain CSV: no header, one matrix row per line, every value a
//! decimal 64-bit float. Values are written with 17 significant digits, which
//! round-trips every finite `f64` exactly.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use l1inf_core::DenseMatrix;

use crate::error::{CliError, CliResult};

pub fn read_matrix(path: &Path) -> CliResult<DenseMatrix> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let parse_err = |line: u64, column: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };

    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, 0, e.to_string())
        })?;
        let line = record.position().map_or(rows as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_err(
                    line,
                    record.len().min(c) + 1,
                    format!("row has {} values, expected {c}", record.len()),
                ));
            }
            Some(_) => {}
        }
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_err(line, j + 1, format!("'{field}' is not a number")))?;
            if !value.is_finite() {
                return Err(parse_err(line, j + 1, format!("'{field}' is not finite")));
            }
            data.push(value);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(1, 1, "file contains no data".into()))?;
    DenseMatrix::new(rows, cols, data).map_err(|e| parse_err(1, 1, e.to_string()))
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix_to<W: Write>(m: &DenseMatrix, out: W) -> io::Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for r in 0..m.rows() {
        writer.write_record(m.row(r).iter().map(|&v| format_value(v)))?;
    }
    writer.flush()
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn with_output<F>(path: Option<&Path>, f: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| CliError::io(PathBuf::from("<stdout>"), e))
        }
    }
}

pub fn write_matrix(path: Option<&Path>, m: &DenseMatrix) -> CliResult<()> {
    with_output(path, |w| write_matrix_to(m, w))
}

/// One non-negative integer per line; blank lines are skipped.
pub fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let label = line.parse().map_err(|_| CliError::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            column: 1,
            message: format!("'{line}' is not a non-negative integer label"),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

pub fn write_lines(path: Option<&Path>, values: &[usize]) -> CliResult<()> {
    with_output(path, |w| {
        for v in values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456789.12345679, f64::MIN_POSITIVE, -0.0, 5e-324] {
            let s = format_value(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }
}
