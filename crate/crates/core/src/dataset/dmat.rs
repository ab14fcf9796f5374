//! DMAT v1: a `DMAT <D> <N>` header line followed by `D` rows of `N`
//! whitespace-separated floats. Label files hold one integer per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::{dense_labels, Dataset, Source};
use crate::error::{Error, Result};

fn format_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads a DMAT file without normalizing it.
pub fn read_dmat(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines.next().ok_or_else(|| format_err(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (rows, cols) = match fields.as_slice() {
        ["DMAT", d, n] => {
            let d = d
                .parse::<usize>()
                .map_err(|_| format_err(path, 1, format!("bad row count {d:?}")))?;
            let n = n
                .parse::<usize>()
                .map_err(|_| format_err(path, 1, format!("bad column count {n:?}")))?;
            (d, n)
        }
        _ => return Err(format_err(path, 1, "expected header `DMAT <D> <N>`")),
    };

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if seen_rows == rows {
            return Err(format_err(path, lineno, format!("more than {rows} data rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v = tok
                .parse::<f64>()
                .map_err(|_| format_err(path, lineno, format!("bad number {tok:?}")))?;
            data.push(v);
        }
        let found = data.len() - before;
        if found != cols {
            return Err(format_err(
                path,
                lineno,
                format!("expected {cols} values, found {found}"),
            ));
        }
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(format_err(
            path,
            text.lines().count(),
            format!("expected {rows} data rows, found {seen_rows}"),
        ));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

/// Loads a DMAT file as a normalized [`Dataset`], optionally with labels.
pub fn load_matrix(path: impl AsRef<Path>, labels: Option<&Path>) -> Result<Dataset> {
    let points = read_dmat(path)?;
    let labels = match labels {
        Some(p) => {
            let l = load_labels(p)?;
            if l.len() != points.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: points.ncols(),
                    found: l.len(),
                });
            }
            Some(l)
        }
        None => None,
    };
    Dataset::new(points, labels, Source::File)
}

/// Writes points row-major using the shortest round-tripping float text.
pub fn save_matrix(points: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("DMAT {} {}\n", points.nrows(), points.ncols());
    for r in 0..points.nrows() {
        for c in 0..points.ncols() {
            if c > 0 {
                out.push(' ');
            }
            write!(out, "{}", points[(r, c)]).unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads one integer label per line, re-indexed to dense `0..n`.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        raw.push(
            t.parse::<i64>()
                .map_err(|_| format_err(path, idx + 1, format!("bad label {t:?}")))?,
        );
    }
    Ok(dense_labels(&raw))
}

pub fn save_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        writeln!(out, "{l}").unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_trip_2x3() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.dmat");
        let m = DMatrix::from_row_slice(2, 3, &[1.5, -2.0, 0.1, 1e-300, 3.25, -0.0]);
        save_matrix(&m, &p).unwrap();
        assert_eq!(read_dmat(&p).unwrap(), m);
    }

    #[test]
    fn short_row_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.dmat");
        fs::write(&p, "DMAT 2 4\n1 2 3\n4 5 6\n").unwrap();
        assert!(matches!(read_dmat(&p), Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.dmat");
        fs::write(&p, "MAT 1 1\n1\n").unwrap();
        assert!(matches!(read_dmat(&p), Err(Error::Format { line: 1, .. })));
        fs::write(&p, "DMAT 1 1\nabc\n").unwrap();
        assert!(matches!(read_dmat(&p), Err(Error::Format { line: 2, .. })));
        fs::write(&p, "DMAT 2 1\n1\n").unwrap();
        assert!(matches!(read_dmat(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn labels_short_by_one() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.dmat");
        let l = dir.path().join("m.labels");
        fs::write(&m, "DMAT 2 3\n1 0 1\n0 1 1\n").unwrap();
        fs::write(&l, "0\n1\n").unwrap();
        assert!(matches!(
            load_matrix(&m, Some(&l)),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.txt");
        save_labels(&[0, 2, 1, 1], &p).unwrap();
        assert_eq!(load_labels(&p).unwrap(), vec![0, 2, 1, 1]);
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_dmat("/nonexistent/x.dmat").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.dmat"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_any_finite(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = DMatrix::from_fn(rows, cols, |_, _| {
                let mantissa: f64 = rng.random_range(-1.0..1.0);
                mantissa * 10f64.powi(rng.random_range(-200..200))
            });
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("m.dmat");
            save_matrix(&m, &p).unwrap();
            prop_assert_eq!(read_dmat(&p).unwrap(), m);
        }
    }
}
