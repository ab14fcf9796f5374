use nalgebra::{DMatrix, DVector};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::sym_eigs;

/// Scores of the mean-centered points on their top-`p` principal directions,
/// as a `p × N` matrix. No re-normalization is applied.
pub fn pca_scores(points: &DMatrix<f64>, p: usize) -> Result<DMatrix<f64>> {
    let (dim, n) = points.shape();
    let max = dim.min(n);
    if p < 1 || p > max {
        return Err(Error::DimensionInvalid { p, max });
    }

    let mean: DVector<f64> = points.column_mean();
    let mut centered = points.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }

    if dim <= n {
        // D × D scatter matrix; its top eigenvectors are the principal axes
        let scatter = &centered * centered.transpose();
        let scatter = (&scatter + scatter.transpose()) * 0.5;
        let eig = sym_eigs(&scatter, dim)?;
        let axes = DMatrix::from_fn(dim, p, |r, c| eig.vectors[(r, dim - 1 - c)]);
        Ok(axes.tr_mul(&centered))
    } else {
        // N × N Gram matrix: score row c is sqrt(λ_c) v_cᵀ
        let gram = centered.tr_mul(&centered);
        let gram = (&gram + gram.transpose()) * 0.5;
        let eig = sym_eigs(&gram, n)?;
        Ok(DMatrix::from_fn(p, n, |c, j| {
            let k = n - 1 - c;
            eig.values[k].max(0.0).sqrt() * eig.vectors[(j, k)]
        }))
    }
}

/// Projects onto the top-`p` principal directions and re-normalizes.
pub fn pca_project(data: &Dataset, p: usize) -> Result<Dataset> {
    let scores = pca_scores(data.points(), p)?;
    Dataset::new(scores, data.labels().map(<[usize]>::to_vec), data.source())
}
