//! File formats: plain CSV for matrices (one row per line) and vectors (one
//! column, one value per line), both headerless, and the iterate log with a
//! fixed header. All numbers are written with 17 significant digits so a
//! read-back reproduces every value bit-exactly.

use crate::linalg::{Matrix, Vector};
use crate::solver::IterateRecord;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
}

fn io_err(path: &Path, source: std::io::Error) -> FileError {
    FileError::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> FileError {
    FileError::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

/// 17 significant digits; round-trips every finite f64 exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_vector(path: impl AsRef<Path>, v: &Vector) -> Result<(), FileError> {
    let path = path.as_ref();
    let mut out = String::new();
    for x in v.iter() {
        out.push_str(&format_value(*x));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<(), FileError> {
    let path = path.as_ref();
    let mut out = String::new();
    for i in 0..m.rows() {
        let row = m
            .row(i)
            .iter()
            .map(|v| format_value(*v))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&row);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vector, FileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut data = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("not a number: {t:?}")))?;
        if !v.is_finite() {
            return Err(parse_err(path, i + 1, "non-finite value"));
        }
        data.push(v);
    }
    if data.is_empty() {
        return Err(parse_err(path, 1, "empty vector file"));
    }
    Ok(Vector::new(data).expect("finiteness checked per line"))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix, FileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in t.split(',') {
            let f = field.trim();
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(path, i + 1, format!("not a number: {f:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(path, i + 1, "non-finite value"));
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    path,
                    i + 1,
                    format!("row has {} fields, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "empty matrix file"));
    }
    let cols = rows[0].len();
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    let r = data.len() / cols;
    Ok(Matrix::new(r, cols, data).expect("validated per line"))
}

pub const LOG_HEADER: &str = "k,alpha,objective,residual,descent_slack,fejer_slack,dist_to_ref";

/// Writes the iterate log under the fixed column contract; optional columns
/// are left empty when they were not recorded.
pub fn write_iterate_log(
    path: impl AsRef<Path>,
    log: &[IterateRecord],
) -> Result<(), FileError> {
    let path = path.as_ref();
    let mut out = String::with_capacity(64 * (log.len() + 1));
    out.push_str(LOG_HEADER);
    out.push('\n');
    for r in log {
        let fejer = r.fejer_certificate.map(format_value).unwrap_or_default();
        let dist = r.distance_to_reference.map(format_value).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            format_value(r.alpha),
            format_value(r.objective),
            format_value(r.residual),
            format_value(r.descent_certificate),
            fejer,
            dist,
        );
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_header_is_stable() {
        assert_eq!(
            LOG_HEADER,
            "k,alpha,objective,residual,descent_slack,fejer_slack,dist_to_ref"
        );
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            read_vector("/nonexistent/definitely/not/here.csv"),
            Err(FileError::Io { .. })
        ));
    }

    #[test]
    fn garbage_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "1.0\nnot-a-number\n").unwrap();
        assert!(matches!(read_vector(&p), Err(FileError::Parse { line: 2, .. })));
    }

    proptest! {
        // Bit-exact CSV round trip for matrices and vectors.
        #[test]
        fn round_trip_is_bit_exact(data in proptest::collection::vec(-1e12f64..1e12, 1..24)) {
            let dir = tempfile::tempdir().unwrap();
            let v = Vector::new(data.clone()).unwrap();
            let vp = dir.path().join("v.csv");
            write_vector(&vp, &v).unwrap();
            let v2 = read_vector(&vp).unwrap();
            prop_assert_eq!(v.as_slice(), v2.as_slice());

            let cols = (1..=3).find(|c| data.len() % c == 0 && data.len() / c >= 1).unwrap_or(1);
            if data.len() % cols == 0 {
                let m = Matrix::new(data.len() / cols, cols, data).unwrap();
                let mp = dir.path().join("m.csv");
                write_matrix(&mp, &m).unwrap();
                let m2 = read_matrix(&mp).unwrap();
                prop_assert_eq!(m, m2);
            }
        }
    }
}
