use nalgebra::DMatrix;

/// Sparse `N × N` self-expression coefficients stored by column.
///
/// Column `i` holds `c_i`, the coefficients expressing point `i` over its
/// selected neighbors, in selection order. The diagonal is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    n: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl CoefficientMatrix {
    /// Panics if a column refers to itself, repeats a row, or is out of range.
    pub fn from_columns(n: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(columns.len(), n, "expected {n} columns");
        for (i, col) in columns.iter().enumerate() {
            for (pos, &(row, _)) in col.iter().enumerate() {
                assert!(row < n, "row {row} out of range in column {i}");
                assert_ne!(row, i, "column {i} has a diagonal entry");
                assert!(
                    col[..pos].iter().all(|&(r, _)| r != row),
                    "column {i} repeats row {row}"
                );
            }
        }
        CoefficientMatrix { n, columns }
    }

    pub fn zeros(n: usize) -> Self {
        CoefficientMatrix {
            n,
            columns: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(row, value)` entries of column `i` in selection order.
    pub fn column(&self, i: usize) -> &[(usize, f64)] {
        &self.columns[i]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.columns.iter().map(Vec::as_slice)
    }

    /// Row indices of column `i`'s support, in selection order.
    pub fn support(&self, i: usize) -> Vec<usize> {
        self.columns[i].iter().map(|&(r, _)| r).collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col]
            .iter()
            .find(|&&(r, _)| r == row)
            .map_or(0.0, |&(_, v)| v)
    }

    /// Count of entries whose value is not exactly zero.
    pub fn nnz(&self) -> usize {
        self.columns
            .iter()
            .map(|c| c.iter().filter(|&&(_, v)| v != 0.0).count())
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                m[(r, i)] = v;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_view() {
        let c = CoefficientMatrix::from_columns(3, vec![vec![(1, 0.5)], vec![], vec![(0, -1.0), (1, 2.0)]]);
        assert_eq!(c.get(1, 0), 0.5);
        assert_eq!(c.get(0, 1), 0.0);
        assert_eq!(c.nnz(), 3);
        assert_eq!(c.support(2), vec![0, 1]);
        let d = c.to_dense();
        assert_eq!(d[(0, 2)], -1.0);
        assert_eq!(d.trace(), 0.0);
    }

    #[test]
    #[should_panic(expected = "diagonal")]
    fn rejects_diagonal() {
        CoefficientMatrix::from_columns(2, vec![vec![(0, 1.0)], vec![]]);
    }

    #[test]
    #[should_panic(expected = "repeats")]
    fn rejects_duplicate_rows() {
        CoefficientMatrix::from_columns(3, vec![vec![(1, 1.0), (1, 2.0)], vec![], vec![]]);
    }
}
