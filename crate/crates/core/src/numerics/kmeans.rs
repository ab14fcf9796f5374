use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone, Copy)]
pub struct KmeansOptions {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
}

/// Outcome of the best restart, plus the objective trace of every restart.
#[derive(Debug, Clone)]
pub struct KmeansRun {
    pub labels: Vec<usize>,
    pub cost: f64,
    pub best_restart: usize,
    /// Within-cluster sum of squares after each assignment step, per restart.
    pub cost_history: Vec<Vec<f64>>,
}

/// k-means++ seeded Lloyd clustering of the rows of `rows`.
pub fn kmeans(rows: &DMatrix<f64>, k: usize, seed: u64, restarts: usize) -> Vec<usize> {
    kmeans_detailed(rows, KmeansOptions { k, seed, restarts }).labels
}

pub fn kmeans_detailed(rows: &DMatrix<f64>, opts: KmeansOptions) -> KmeansRun {
    let n = rows.nrows();
    let dim = rows.ncols();
    assert!(opts.k >= 1 && opts.k <= n, "k = {} with {} points", opts.k, n);
    assert!(opts.restarts >= 1, "need at least one restart");

    let mut points = Vec::with_capacity(n * dim);
    for r in 0..n {
        points.extend(rows.row(r).iter());
    }
    let points = Points { data: &points, dim };

    let runs: Vec<Restart> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            lloyd(&points, opts.k, &mut rng)
        })
        .collect();

    // min cost, ties to the earliest restart
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, run)| if run.cost < runs[b].cost { i } else { b });

    KmeansRun {
        labels: runs[best].labels.clone(),
        cost: runs[best].cost,
        best_restart: best,
        cost_history: runs.into_iter().map(|r| r.history).collect(),
    }
}

struct Points<'a> {
    data: &'a [f64],
    dim: usize,
}

impl Points<'_> {
    fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

struct Restart {
    labels: Vec<usize>,
    cost: f64,
    history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus(points: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points.row(first).to_vec()];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), &centers[0])).collect();

    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `acc` a hair under `target`
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // every point coincides with a center: take an unused index
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        let c = points.row(next).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(points: &Points, k: usize, rng: &mut ChaCha8Rng) -> Restart {
    let n = points.len();
    let dim = points.dim;
    let mut centers = plus_plus(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut cost = f64::INFINITY;

    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        cost = 0.0;
        for (i, label) in labels.iter_mut().enumerate() {
            let p = points.row(i);
            // keep the current center unless another is strictly closer
            let (mut best, mut best_d) = if *label == usize::MAX {
                (0, sq_dist(p, &centers[0]))
            } else {
                (*label, sq_dist(p, &centers[*label]))
            };
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(p, center);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if *label != best {
                *label = best;
                changed = true;
            }
            cost += best_d;
        }
        history.push(cost);
        if !changed {
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            // an emptied cluster keeps its previous center
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                centers[c] = sums[c].iter().map(|s| s * inv).collect();
            }
        }
    }

    Restart {
        labels,
        cost,
        history,
    }
}
