//! Clustering accuracy, per-cluster connectivity, and connection diagnostics.

use crate::coefficients::CoefficientMatrix;
use crate::error::{Error, Result};
use crate::numerics::sym_eigs;
use crate::spectral::{normalized_laplacian, AffinityMatrix};

/// Summary of one end-to-end run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy_pct: f64,
    pub connectivity: f64,
    pub subspace_preserving_rate: f64,
    pub fallback_count: usize,
    pub isolated_count: usize,
    pub elapsed_coding_s: f64,
    pub elapsed_spectral_s: f64,
}

impl EvalReport {
    /// Equality ignoring the wall-clock fields.
    pub fn same_outcome(&self, other: &EvalReport) -> bool {
        self.accuracy_pct == other.accuracy_pct
            && self.connectivity == other.connectivity
            && self.subspace_preserving_rate == other.subspace_preserving_rate
            && self.fallback_count == other.fallback_count
            && self.isolated_count == other.isolated_count
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::LengthMismatch(a, b))
    } else {
        Ok(())
    }
}

/// Minimum-cost perfect assignment on a square matrix (Hungarian method with
/// potentials). Returns `assign[row] = column`.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based; column 0 is a virtual start
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = INF;
            let mut col1 = 0;
            for col in 1..=n {
                if !used[col] {
                    let cur = cost[r0 - 1][col - 1] - u[r0] - v[col];
                    if cur < minv[col] {
                        minv[col] = cur;
                        way[col] = col0;
                    }
                    if minv[col] < delta {
                        delta = minv[col];
                        col1 = col;
                    }
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for col in 1..=n {
        assign[owner[col] - 1] = col - 1;
    }
    assign
}

fn confusion(truth: &[usize], pred: &[usize]) -> Vec<Vec<i64>> {
    let classes = truth.iter().max().map_or(0, |&m| m + 1);
    let clusters = pred.iter().max().map_or(0, |&m| m + 1);
    let size = classes.max(clusters);
    let mut counts = vec![vec![0i64; size]; size];
    for (&t, &p) in truth.iter().zip(pred) {
        counts[p][t] += 1;
    }
    counts
}

/// Percentage of points correctly labelled under the best one-to-one
/// mapping from predicted clusters to true classes.
pub fn clustering_accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    check_len(truth.len(), pred.len())?;
    if truth.is_empty() {
        return Ok(100.0);
    }
    let counts = confusion(truth, pred);
    let top = counts.iter().flatten().copied().max().unwrap_or(0);
    let cost: Vec<Vec<i64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| top - c).collect())
        .collect();
    let assign = min_cost_assignment(&cost);
    let matched: i64 = assign.iter().enumerate().map(|(p, &t)| counts[p][t]).sum();
    Ok(100.0 * matched as f64 / truth.len() as f64)
}

/// Second-smallest normalized-Laplacian eigenvalue of one graph, or 0 when
/// it has fewer than two vertices or is disconnected.
pub fn algebraic_connectivity(w: &AffinityMatrix) -> Result<f64> {
    if w.n() < 2 || w.components() > 1 {
        return Ok(0.0);
    }
    let eig = sym_eigs(&normalized_laplacian(w), 2)?;
    Ok(eig.values[1].max(0.0))
}

/// Minimum over ground-truth clusters of the cluster subgraph's
/// [`algebraic_connectivity`].
pub fn connectivity(w: &AffinityMatrix, truth: &[usize]) -> Result<f64> {
    check_len(w.n(), truth.len())?;
    let classes = truth.iter().max().map_or(0, |&m| m + 1);
    let mut members = vec![Vec::new(); classes];
    for (i, &t) in truth.iter().enumerate() {
        members[t].push(i);
    }
    let mut worst = f64::INFINITY;
    for m in members.iter().filter(|m| !m.is_empty()) {
        worst = worst.min(algebraic_connectivity(&w.induced(m))?);
        if worst == 0.0 {
            break;
        }
    }
    Ok(if worst.is_finite() { worst } else { 0.0 })
}

/// Mean over columns with nonzero mass of the fraction of `ℓ1` mass sitting
/// on points with the column's own label. With no mass anywhere, 1.
pub fn subspace_preserving_rate(c: &CoefficientMatrix, truth: &[usize]) -> Result<f64> {
    check_len(c.n(), truth.len())?;
    let mut total = 0.0;
    let mut counted = 0usize;
    for (i, col) in c.columns().enumerate() {
        let mass: f64 = col.iter().map(|e| e.1.abs()).sum();
        if mass == 0.0 {
            continue;
        }
        let same: f64 = col
            .iter()
            .filter(|e| truth[e.0] == truth[i])
            .map(|e| e.1.abs())
            .sum();
        total += same / mass;
        counted += 1;
    }
    Ok(if counted == 0 { 1.0 } else { total / counted as f64 })
}

/// `con_i` = nonzeros in column `i` (outgoing) + nonzeros in row `i` (incoming).
pub fn connection_histogram(c: &CoefficientMatrix) -> Vec<usize> {
    let mut con = vec![0usize; c.n()];
    for (i, col) in c.columns().enumerate() {
        for &(r, v) in col {
            if v != 0.0 {
                con[i] += 1;
                con[r] += 1;
            }
        }
    }
    con
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn complete(n: usize) -> AffinityMatrix {
        AffinityMatrix::from_dense(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 })).unwrap()
    }

    fn block_diag(blocks: &[AffinityMatrix]) -> AffinityMatrix {
        let n: usize = blocks.iter().map(|b| b.n()).sum();
        let mut w = DMatrix::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            w.view_mut((off, off), (b.n(), b.n())).copy_from(b.as_matrix());
            off += b.n();
        }
        AffinityMatrix::from_dense(w).unwrap()
    }

    fn brute_force_accuracy(truth: &[usize], pred: &[usize]) -> f64 {
        let counts = confusion(truth, pred);
        let size = counts.len();
        let mut perm: Vec<usize> = (0..size).collect();
        let mut best = 0;
        permute(&mut perm, 0, &mut |p| {
            best = best.max((0..size).map(|c| counts[c][p[c]]).sum::<i64>());
        });
        100.0 * best as f64 / truth.len() as f64
    }

    fn permute(p: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
        if at == p.len() {
            visit(p);
            return;
        }
        for i in at..p.len() {
            p.swap(at, i);
            permute(p, at + 1, visit);
            p.swap(at, i);
        }
    }

    #[test]
    fn swapped_names_are_perfect() {
        assert_eq!(clustering_accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 100.0);
    }

    #[test]
    fn half_right() {
        assert_eq!(clustering_accuracy(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 50.0);
    }

    #[test]
    fn single_prediction() {
        let a = clustering_accuracy(&[0, 1, 2], &[0, 0, 0]).unwrap();
        assert!((a - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(clustering_accuracy(&[0, 1], &[0]), Err(Error::LengthMismatch(2, 1))));
    }

    #[test]
    fn assignment_known_optimum() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = min_cost_assignment(&cost);
        let total: i64 = a.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn complete_triangles_connectivity() {
        // normalized Laplacian of K3 = I - (J - I)/2 has spectrum {0, 3/2, 3/2}
        let w = block_diag(&[complete(3), complete(3)]);
        let c = connectivity(&w, &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!((c - 1.5).abs() < 1e-10);
    }

    #[test]
    fn disconnected_cluster_has_zero_connectivity() {
        let w = block_diag(&[complete(2), complete(2)]);
        assert_eq!(connectivity(&w, &[0, 0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn single_edges_have_connectivity_two() {
        // K2: L = [[1,-1],[-1,1]], spectrum {0, 2}
        let w = block_diag(&[complete(2), complete(2)]);
        let c = connectivity(&w, &[0, 0, 1, 1]).unwrap();
        assert!((c - 2.0).abs() < 1e-10);
    }

    #[test]
    fn singleton_cluster_is_trivial() {
        let w = complete(3);
        assert_eq!(connectivity(&w, &[0, 0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn preserving_rate_cases() {
        let truth = [0, 0, 1, 1];
        let good = CoefficientMatrix::from_columns(4, vec![vec![(1, 0.5)], vec![(0, -1.0)], vec![(3, 0.2)], vec![]]);
        assert_eq!(subspace_preserving_rate(&good, &truth).unwrap(), 1.0);
        let bad = CoefficientMatrix::from_columns(4, vec![vec![(2, 0.5)], vec![(3, -1.0)], vec![], vec![(0, 1.0)]]);
        assert_eq!(subspace_preserving_rate(&bad, &truth).unwrap(), 0.0);
        let mixed = CoefficientMatrix::from_columns(4, vec![vec![(1, 0.3), (2, -0.1)], vec![], vec![], vec![]]);
        assert!((subspace_preserving_rate(&mixed, &truth).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn histogram_cases() {
        assert_eq!(connection_histogram(&CoefficientMatrix::zeros(3)), vec![0, 0, 0]);
        // C[1][2] nonzero: column 2 has an entry at row 1
        let c = CoefficientMatrix::from_columns(4, vec![vec![], vec![], vec![(1, 0.4)], vec![]]);
        assert_eq!(connection_histogram(&c), vec![0, 1, 1, 0]);
        let k = 2;
        let full = CoefficientMatrix::from_columns(
            4,
            (0..4).map(|i| vec![((i + 1) % 4, 0.5), ((i + 2) % 4, 0.25)]).collect(),
        );
        assert_eq!(connection_histogram(&full).iter().sum::<usize>(), 2 * 4 * k);
    }

    proptest! {
        #[test]
        fn matches_brute_force(labels in prop::collection::vec((0usize..4, 0usize..4), 1..9)) {
            let truth: Vec<usize> = labels.iter().map(|l| l.0).collect();
            let pred: Vec<usize> = labels.iter().map(|l| l.1).collect();
            prop_assert_eq!(clustering_accuracy(&truth, &pred).unwrap(), brute_force_accuracy(&truth, &pred));
        }

        #[test]
        fn invariant_to_renaming(labels in prop::collection::vec(0usize..5, 1..30), shift in 1usize..5) {
            let renamed: Vec<usize> = labels.iter().map(|l| (l + shift) % 5).collect();
            prop_assert_eq!(clustering_accuracy(&labels, &labels).unwrap(), 100.0);
            prop_assert_eq!(clustering_accuracy(&labels, &renamed).unwrap(), 100.0);
        }

        #[test]
        fn histogram_sums_to_twice_nnz(seed in any::<u64>(), n in 2usize..15) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut cols = vec![Vec::new(); n];
            for (i, col) in cols.iter_mut().enumerate() {
                for r in (0..n).filter(|&r| r != i) {
                    if rng.random_bool(0.3) {
                        col.push((r, rng.random_range(-1.0..1.0)));
                    }
                }
            }
            let c = CoefficientMatrix::from_columns(n, cols);
            prop_assert_eq!(connection_histogram(&c).iter().sum::<usize>(), 2 * c.nnz());
        }
    }
}
