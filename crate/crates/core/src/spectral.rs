//! Affinity construction and normalized spectral clustering.

use nalgebra::DMatrix;

use crate::coefficients::CoefficientMatrix;
use crate::error::{Error, Result};
use crate::numerics::{kmeans, sym_eigs, DEFAULT_RESTARTS};

/// Symmetric, nonnegative affinity with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(DMatrix<f64>);

impl AffinityMatrix {
    /// Checks the invariants exactly.
    pub fn from_dense(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::DimensionMismatch {
                expected: w.nrows(),
                found: w.ncols(),
            });
        }
        let n = w.nrows();
        let mut asym = 0.0_f64;
        for i in 0..n {
            if w[(i, i)] != 0.0 {
                return Err(Error::ConfigInvalid(format!("affinity diagonal entry {i} is nonzero")));
            }
            for j in 0..n {
                if w[(i, j)].is_nan() || w[(i, j)] < 0.0 {
                    return Err(Error::ConfigInvalid(format!("affinity entry ({i}, {j}) is negative")));
                }
                asym = asym.max((w[(i, j)] - w[(j, i)]).abs());
            }
        }
        if asym > 0.0 {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(AffinityMatrix(w))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.sum()).collect()
    }

    /// Vertices with zero degree.
    pub fn isolated_count(&self) -> usize {
        self.degrees().iter().filter(|&&d| d == 0.0).count()
    }

    /// Affinity restricted to `vertices`, in the given order.
    pub fn induced(&self, vertices: &[usize]) -> AffinityMatrix {
        let m = vertices.len();
        AffinityMatrix(DMatrix::from_fn(m, m, |a, b| self.0[(vertices[a], vertices[b])]))
    }

    /// Number of connected components of the graph with an edge wherever `W > 0`.
    pub fn components(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for (u, seen_u) in seen.iter_mut().enumerate() {
                    if !*seen_u && self.0[(v, u)] > 0.0 {
                        *seen_u = true;
                        stack.push(u);
                    }
                }
            }
        }
        count
    }
}

/// `W = |C| + |C|ᵀ`.
pub fn build_affinity(c: &CoefficientMatrix) -> AffinityMatrix {
    let n = c.n();
    let mut w = DMatrix::zeros(n, n);
    for (i, col) in c.columns().enumerate() {
        for &(r, v) in col {
            let a = v.abs();
            w[(r, i)] += a;
            w[(i, r)] += a;
        }
    }
    AffinityMatrix(w)
}

/// `I − D^{-1/2} W D^{-1/2}`, where isolated vertices get a zero row and
/// column in `D^{-1/2}`.
pub fn normalized_laplacian(w: &AffinityMatrix) -> DMatrix<f64> {
    let n = w.n();
    let inv_sqrt: Vec<f64> = w
        .degrees()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let m = w.as_matrix();
    DMatrix::from_fn(n, n, |i, j| {
        let off = m[(i, j)] * (inv_sqrt[i] * inv_sqrt[j]);
        if i == j {
            1.0 - off
        } else {
            -off
        }
    })
}

/// Rows of the `n_clusters` bottom Laplacian eigenvectors, each scaled to
/// unit norm (zero rows stay zero).
pub fn spectral_embedding(w: &AffinityMatrix, n_clusters: usize) -> Result<DMatrix<f64>> {
    let lap = normalized_laplacian(w);
    let eig = sym_eigs(&lap, n_clusters)?;
    let mut rows = eig.vectors;
    for mut r in rows.row_iter_mut() {
        let norm = r.norm();
        if norm > 0.0 {
            r /= norm;
        }
    }
    Ok(rows)
}

/// Normalized spectral clustering into `n_clusters` groups.
pub fn spectral_cluster(w: &AffinityMatrix, n_clusters: usize, seed: u64) -> Result<Vec<usize>> {
    let n = w.n();
    if n_clusters < 1 || n_clusters > n {
        return Err(Error::ConfigInvalid(format!(
            "n_clusters = {n_clusters} with {n} points"
        )));
    }
    let rows = spectral_embedding(w, n_clusters)?;
    Ok(kmeans(&rows, n_clusters, seed, DEFAULT_RESTARTS))
}
