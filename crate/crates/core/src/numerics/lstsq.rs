use nalgebra::{DMatrix, DVector};

/// Relative magnitude below which a triangular pivot is treated as zero.
pub const PIVOT_TOL: f64 = 1e-10;

/// Least-squares fit of a vector onto the span of a set of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coeffs: DVector<f64>,
    pub residual: DVector<f64>,
}

/// Projects `x` onto `span(basis)`.
///
/// Uses a Householder QR when the basis is numerically full rank. Otherwise
/// the fit is made on a maximal independent subset of columns and the
/// null-space component is removed, so rank-deficient supports get the
/// minimum-norm coefficient vector.
pub fn lstsq_project(x: &DVector<f64>, basis: &DMatrix<f64>) -> Projection {
    assert_eq!(x.len(), basis.nrows(), "vector and basis row counts differ");
    let s = basis.ncols();
    if s == 0 {
        return Projection {
            coeffs: DVector::zeros(0),
            residual: x.clone(),
        };
    }

    let scale = basis
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max);
    let coeffs = if scale == 0.0 {
        DVector::zeros(s)
    } else {
        qr_solve(x, basis, scale).unwrap_or_else(|| min_norm_solve(x, basis, scale))
    };

    let residual = x - basis * &coeffs;
    Projection { coeffs, residual }
}

/// Least-squares solve through a thin QR; `None` when a pivot of `R` is
/// negligible relative to `scale`.
fn qr_solve(x: &DVector<f64>, basis: &DMatrix<f64>, scale: f64) -> Option<DVector<f64>> {
    let s = basis.ncols();
    if s > basis.nrows() {
        return None;
    }
    let qr = basis.clone().qr();
    let r = qr.r();
    if (0..s).any(|i| r[(i, i)].abs() <= PIVOT_TOL * scale) {
        return None;
    }
    let qtx = qr.q().tr_mul(x);
    r.solve_upper_triangular(&qtx)
}

/// Minimum-norm solution for a rank-deficient basis.
///
/// Columns are kept greedily when they add a direction of relative size
/// above `PIVOT_TOL`; every dropped column is (numerically) a combination of
/// the kept ones and contributes one null-space vector. Projecting the
/// particular solution off that null space yields the minimum-norm answer.
fn min_norm_solve(x: &DVector<f64>, basis: &DMatrix<f64>, scale: f64) -> DVector<f64> {
    let s = basis.ncols();
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..s {
        let mut trial = kept.clone();
        trial.push(j);
        let sub = basis.select_columns(&trial);
        if qr_solve(&DVector::zeros(basis.nrows()), &sub, scale).is_some() {
            kept = trial;
        }
    }
    if kept.is_empty() {
        return DVector::zeros(s);
    }

    let sub = basis.select_columns(&kept);
    let fit = qr_solve(x, &sub, scale).expect("kept columns are independent");
    let mut particular = DVector::zeros(s);
    for (pos, &j) in kept.iter().enumerate() {
        particular[j] = fit[pos];
    }

    let dropped: Vec<usize> = (0..s).filter(|j| !kept.contains(j)).collect();
    let mut null = DMatrix::zeros(s, dropped.len());
    for (col, &j) in dropped.iter().enumerate() {
        let combo = qr_solve(&basis.column(j).clone_owned(), &sub, scale)
            .expect("kept columns are independent");
        null[(j, col)] = 1.0;
        for (pos, &kj) in kept.iter().enumerate() {
            null[(kj, col)] = -combo[pos];
        }
    }
    // The null-space vectors each carry a distinct unit entry, so they are
    // independent and the full-rank path applies.
    let null_scale = null.column_iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let along = qr_solve(&particular, &null, null_scale).expect("null-space basis is independent");
    particular - null * along
}
