//! Unit-norm point sets: normalization, file I/O, PCA and the synthetic
//! union-of-subspaces generator.

mod dmat;
mod pca;
mod synth;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use dmat::{load_labels, load_matrix, read_dmat, save_labels, save_matrix};
pub use pca::{pca_project, pca_scores};
pub use synth::{generate_synthetic, SynthConfig};

/// Columns with a Euclidean norm below this are rejected by [`normalize_columns`].
pub const ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Synthetic,
    File,
}

/// `D × N` matrix of unit-norm points, one per column, with optional
/// dense 0-based ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: DMatrix<f64>,
    labels: Option<Vec<usize>>,
    source: Source,
}

impl Dataset {
    /// Normalizes the columns of `points` and validates `labels` against them.
    /// Labels are re-indexed densely, preserving their relative order.
    pub fn new(points: DMatrix<f64>, labels: Option<Vec<usize>>, source: Source) -> Result<Self> {
        let points = normalize_columns(&points)?;
        let labels = match labels {
            Some(l) if l.len() != points.ncols() => {
                return Err(Error::DimensionMismatch {
                    expected: points.ncols(),
                    found: l.len(),
                })
            }
            Some(l) => Some(dense_labels(&l)),
            None => None,
        };
        Ok(Dataset {
            points,
            labels,
            source,
        })
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// Ambient dimension `D`.
    pub fn dim(&self) -> usize {
        self.points.nrows()
    }

    /// Number of points `N`.
    pub fn len(&self) -> usize {
        self.points.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.points.ncols() == 0
    }

    /// Number of distinct ground-truth classes, if labelled.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().max().map_or(0, |&m| m + 1))
    }

    pub fn with_labels(self, labels: Vec<usize>) -> Result<Self> {
        Dataset::new(self.points, Some(labels), self.source)
    }
}

/// Divides each column by its Euclidean norm.
pub fn normalize_columns(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = matrix.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm < ZERO_NORM {
            return Err(Error::ZeroColumn(j));
        }
        col /= norm;
    }
    Ok(out)
}

/// Maps arbitrary integer labels onto `0..n` in ascending order of value.
pub fn dense_labels<T: Ord + Copy>(raw: &[T]) -> Vec<usize> {
    let mut uniq: Vec<T> = raw.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    raw.iter()
        .map(|v| uniq.binary_search(v).expect("value taken from the same slice"))
        .collect()
}
