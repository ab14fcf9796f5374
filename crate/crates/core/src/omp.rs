//! Sparse self-expression by orthogonal matching pursuit.
//!
//! Each point `x_i` is coded independently: starting from `r = x_i`, pick the
//! other point with the largest `|<r, x_j>|`, re-project `x_i` onto the span of
//! everything picked so far, and repeat until `k` neighbors are chosen or the
//! residual drops to `eps`.

use log::debug;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::coefficients::CoefficientMatrix;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::lstsq_project;

pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpParams {
    /// Maximum number of neighbors per point.
    pub k: usize,
    /// Stop once the residual norm is at most this.
    pub eps: f64,
}

impl OmpParams {
    pub fn new(k: usize) -> Self {
        OmpParams { k, eps: DEFAULT_EPS }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::ConfigInvalid("k must be >= 1".into()));
        }
        if self.eps.is_nan() || self.eps < 0.0 {
            return Err(Error::ConfigInvalid(format!("eps must be >= 0, got {}", self.eps)));
        }
        Ok(())
    }
}

/// Index of the largest entry of `dots` outside `exclude`, ties to the
/// smallest index. `None` when every remaining candidate is zero.
pub fn select_neighbor(dots: &[f64], exclude: &[usize]) -> Option<usize> {
    let mut best = None;
    let mut best_val = 0.0;
    for (j, &v) in dots.iter().enumerate() {
        if v > best_val && !exclude.contains(&j) {
            best = Some(j);
            best_val = v;
        }
    }
    best
}

/// `|Xᵀ r|` for every column of `points`.
pub(crate) fn abs_dots(points: &DMatrix<f64>, r: &DVector<f64>) -> Vec<f64> {
    points.tr_mul(r).iter().map(|v| v.abs()).collect()
}

/// The greedy loop for one point, with every intermediate residual norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnTrace {
    pub entries: Vec<(usize, f64)>,
    /// `residual_norms[0] = ‖x_i‖`, then one entry per projection.
    pub residual_norms: Vec<f64>,
    pub residual: DVector<f64>,
}

/// Runs the greedy loop for point `i`. When `first` is given it replaces the
/// unrestricted choice at the first iteration.
pub(crate) fn code_point(
    points: &DMatrix<f64>,
    i: usize,
    params: &OmpParams,
    first: Option<usize>,
) -> ColumnTrace {
    let x = points.column(i).clone_owned();
    let mut r = x.clone();
    let mut support: Vec<usize> = Vec::with_capacity(params.k);
    let mut coeffs = DVector::zeros(0);
    let mut residual_norms = vec![r.norm()];

    for s in 0..params.k {
        if r.norm() <= params.eps {
            break;
        }
        let pick = match (s, first) {
            (0, Some(j)) => Some(j),
            _ => {
                let mut exclude = support.clone();
                exclude.push(i);
                select_neighbor(&abs_dots(points, &r), &exclude)
            }
        };
        let Some(j) = pick else { break };
        support.push(j);
        let proj = lstsq_project(&x, &points.select_columns(&support));
        r = proj.residual;
        coeffs = proj.coeffs;
        residual_norms.push(r.norm());
    }

    if support.is_empty() {
        debug!("point {i} has an empty coefficient column");
    }
    ColumnTrace {
        entries: support.into_iter().zip(coeffs.iter().copied()).collect(),
        residual_norms,
        residual: r,
    }
}

/// Traces the coding of a single point; exposed for diagnostics and tests.
pub fn omp_code_column(data: &Dataset, i: usize, params: &OmpParams) -> ColumnTrace {
    code_point(data.points(), i, params, None)
}

/// Codes every point against all the others.
pub fn omp_sparse_code(data: &Dataset, params: &OmpParams) -> Result<CoefficientMatrix> {
    params.validate()?;
    let n = data.len();
    if n < 2 {
        return Err(Error::DatasetTooSmall(n));
    }
    let points = data.points();
    let columns = (0..n)
        .into_par_iter()
        .map(|i| code_point(points, i, params, None).entries)
        .collect();
    Ok(CoefficientMatrix::from_columns(n, columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Source;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn angles(deg: &[f64]) -> Dataset {
        let mut m = DMatrix::zeros(2, deg.len());
        for (j, a) in deg.iter().enumerate() {
            let r = a.to_radians();
            m[(0, j)] = r.cos();
            m[(1, j)] = r.sin();
        }
        Dataset::new(m, None, Source::File).unwrap()
    }

    fn random_data(dim: usize, n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(dim, n, |_, _| rng.random_range(-1.0..1.0));
        Dataset::new(m, None, Source::File).unwrap()
    }

    #[test]
    fn select_basic() {
        assert_eq!(select_neighbor(&[0.0, 0.8, 0.3], &[0]), Some(1));
    }

    #[test]
    fn select_tie_goes_to_smallest_index() {
        assert_eq!(select_neighbor(&[0.5, 0.5, 0.0], &[2]), Some(0));
    }

    #[test]
    fn select_no_candidate() {
        assert_eq!(select_neighbor(&[0.0, 0.0, 0.0], &[0]), None);
        assert_eq!(select_neighbor(&[0.9, 0.0], &[0]), None);
    }

    #[test]
    fn picks_most_correlated_point() {
        // |<x1,x2>| = cos 10° beats |<x1,x3>| = cos 80°
        let data = angles(&[0.0, 10.0, 80.0]);
        let c = omp_sparse_code(&data, &OmpParams::new(1)).unwrap();
        assert_eq!(c.support(0), vec![1]);
    }

    #[test]
    fn exact_duplicate_absorbs_the_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut m = DMatrix::from_fn(5, 6, |_, _| rng.random_range(-1.0..1.0));
        let dup = m.column(1).clone_owned();
        m.set_column(4, &dup);
        let data = Dataset::new(m, None, Source::File).unwrap();
        let trace = omp_code_column(&data, 1, &OmpParams::new(3));
        assert_eq!(trace.entries.len(), 1);
        assert_eq!(trace.entries[0].0, 4);
        assert!(trace.residual.norm() < 1e-9);
    }

    #[test]
    fn too_small() {
        let data = angles(&[0.0]);
        assert!(matches!(
            omp_sparse_code(&data, &OmpParams::new(1)),
            Err(Error::DatasetTooSmall(1))
        ));
    }

    #[test]
    fn support_shorter_when_candidates_run_out() {
        // three points in the plane: after two picks the residual is zero
        let data = angles(&[0.0, 30.0, 70.0]);
        let c = omp_sparse_code(&data, &OmpParams::new(5)).unwrap();
        for i in 0..3 {
            assert!(c.column(i).len() <= 2);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn column_contract(seed in any::<u64>(), k in 1usize..6, dim in 2usize..8, n in 2usize..20) {
            let data = random_data(dim, n, seed);
            let c = omp_sparse_code(&data, &OmpParams::new(k)).unwrap();
            for i in 0..n {
                let col = c.column(i);
                prop_assert!(col.len() <= k);
                prop_assert_eq!(c.get(i, i), 0.0);
                let mut rows: Vec<usize> = col.iter().map(|e| e.0).collect();
                rows.sort();
                rows.dedup();
                prop_assert_eq!(rows.len(), col.len());
            }
        }

        #[test]
        fn residual_shrinks_and_stays_orthogonal(seed in any::<u64>(), k in 1usize..8) {
            let data = random_data(10, 30, seed);
            for i in [0, 7, 29] {
                let t = omp_code_column(&data, i, &OmpParams::new(k));
                for w in t.residual_norms.windows(2) {
                    prop_assert!(w[1] <= w[0] + 1e-12);
                }
                for &(j, _) in &t.entries {
                    prop_assert!(t.residual.dot(&data.points().column(j)).abs() < 1e-8);
                }
            }
        }
    }
}
