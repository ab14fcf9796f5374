use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Absolute asymmetry tolerated by [`sym_eigs`], scaled by `max(1, max|A_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenpairs in ascending eigenvalue order.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: DVector<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: DMatrix<f64>,
}

/// The `m` algebraically smallest eigenpairs of a symmetric matrix.
///
/// Each eigenvector's sign is fixed so that its largest-magnitude entry is
/// positive (first such entry on ties).
pub fn sym_eigs(a: &DMatrix<f64>, m: usize) -> Result<EigenResult> {
    let n = a.nrows();
    assert!(a.is_square(), "sym_eigs needs a square matrix");
    assert!(m >= 1 && m <= n, "requested {m} eigenpairs of a {n}x{n} matrix");

    let scale = a.amax().max(1.0);
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }

    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));

    let values = DVector::from_iterator(m, order[..m].iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, m);
    for (dst, &src) in order[..m].iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        let mut pivot = 0;
        for r in 1..n {
            if v[r].abs() > v[pivot].abs() {
                pivot = r;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(dst, &v);
    }
    Ok(EigenResult { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity() {
        let r = sym_eigs(&DMatrix::identity(3, 3), 3).unwrap();
        for v in r.values.iter() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diagonal_smallest_two() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let r = sym_eigs(&a, 2).unwrap();
        assert_abs_diff_eq!(r.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.values[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.vectors[(1, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.vectors[(2, 1)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_by_two() {
        // det([[2-λ,1],[1,2-λ]]) = (λ-1)(λ-3)
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = sym_eigs(&a, 2).unwrap();
        assert_abs_diff_eq!(r.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.values[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn sign_convention() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = sym_eigs(&a, 2).unwrap();
        for c in r.vectors.column_iter() {
            let big = c.iter().cloned().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(sym_eigs(&a, 1), Err(Error::NotSymmetric(_))));
    }
}
