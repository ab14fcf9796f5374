//! Restricted-connection OMP.
//!
//! The first neighbor each point picks is drawn through a control matrix `M`
//! that multiplies the inner products before the argmax. Every point starts
//! with a budget of `rcon` incoming first-neighbor connections; once a point
//! has been picked `rcon` times its column of `M` is zeroed and nobody else
//! may pick it first. A point that was picked by `i` may not pick `i` back.
//! Iterations after the first run plain OMP.
//!
//! `M` is never stored densely. It only ever receives three kinds of zeros
//! (the diagonal, single entries, whole columns), so [`ControlState`] keeps
//! the remaining budgets, the blocked `(current, candidate)` pairs and the
//! exhausted columns.

use std::collections::HashSet;

use log::debug;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coefficients::CoefficientMatrix;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::omp::{abs_dots, code_point, OmpParams, DEFAULT_EPS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcompParams {
    pub k: usize,
    /// Incoming first-neighbor connections each point may receive.
    pub rcon: usize,
    pub eps: f64,
    /// Once `i` has picked `j`, forbid `j` from picking `i` first (the
    /// `M_ji = 0` update). On by default. With it off only the budget masks
    /// anything, and a slack budget reduces exactly to plain OMP; with it on,
    /// mutual nearest neighbors are always split.
    pub block_reciprocal: bool,
}

impl RcompParams {
    pub fn new(k: usize, rcon: usize) -> Self {
        RcompParams {
            k,
            rcon,
            eps: DEFAULT_EPS,
            block_reciprocal: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rcon < 1 {
            return Err(Error::ConfigInvalid("rcon must be >= 1".into()));
        }
        self.omp().validate()
    }

    fn omp(&self) -> OmpParams {
        OmpParams {
            k: self.k,
            eps: self.eps,
        }
    }
}

/// Implicit control matrix plus the remaining connection budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlState {
    rcon: usize,
    ncon: Vec<usize>,
    /// `(candidate, current)`: `current` may not select `candidate`.
    blocked: HashSet<(usize, usize)>,
    exhausted: Vec<bool>,
    block_reciprocal: bool,
}

impl ControlState {
    pub fn new(n: usize, rcon: usize) -> Self {
        ControlState {
            rcon,
            ncon: vec![rcon; n],
            blocked: HashSet::new(),
            exhausted: vec![rcon == 0; n],
            block_reciprocal: true,
        }
    }

    pub fn with_reciprocal_blocking(mut self, on: bool) -> Self {
        self.block_reciprocal = on;
        self
    }

    pub fn len(&self) -> usize {
        self.ncon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ncon.is_empty()
    }

    pub fn rcon(&self) -> usize {
        self.rcon
    }

    /// Remaining budget of point `j`.
    pub fn ncon(&self, j: usize) -> usize {
        self.ncon[j]
    }

    pub fn is_exhausted(&self, j: usize) -> bool {
        self.exhausted[j]
    }

    pub fn exhausted(&self) -> impl Iterator<Item = usize> + '_ {
        self.exhausted
            .iter()
            .enumerate()
            .filter_map(|(j, &e)| e.then_some(j))
    }

    pub fn is_blocked(&self, candidate: usize, current: usize) -> bool {
        self.blocked.contains(&(candidate, current))
    }

    pub fn blocked_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocked.iter().copied()
    }

    /// Zeroes the single entry of `M` that lets `current` select `candidate`.
    pub fn block(&mut self, candidate: usize, current: usize) {
        self.blocked.insert((candidate, current));
    }

    /// Zeroes column `j` of `M`: nobody may select `j` any more. This is the
    /// hook for strategies that drop points outright.
    pub fn exhaust_column(&mut self, j: usize) {
        self.ncon[j] = 0;
        self.exhausted[j] = true;
    }

    /// Control coefficient applied to the inner product of the `current`
    /// point's residual with `candidate`.
    pub fn coefficient(&self, current: usize, candidate: usize) -> f64 {
        if current == candidate || self.exhausted[candidate] || self.is_blocked(candidate, current) {
            0.0
        } else {
            1.0
        }
    }

    /// Elementwise `dots ⊙ M[current, ·]`.
    pub fn apply_mask(&self, dots: &[f64], current: usize) -> Vec<f64> {
        dots.iter()
            .enumerate()
            .map(|(j, &v)| v * self.coefficient(current, j))
            .collect()
    }

    /// Books the connection `current → chosen`.
    fn record(&mut self, current: usize, chosen: usize) {
        self.ncon[chosen] = self.ncon[chosen].saturating_sub(1);
        self.block(chosen, current);
        if self.block_reciprocal {
            self.block(current, chosen);
        }
        if self.ncon[chosen] == 0 {
            self.exhausted[chosen] = true;
        }
    }
}

/// Stand-alone form of [`ControlState::apply_mask`].
pub fn apply_mask(dots: &[f64], state: &ControlState, i: usize) -> Vec<f64> {
    state.apply_mask(dots, i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FirstSelection {
    pub index: usize,
    /// The masked products were all zero and the raw argmax was used.
    pub fallback: bool,
}

/// Chooses point `i`'s first neighbor through the control matrix and updates
/// the budgets. Returns `None` only if the raw products are all zero too.
pub fn rcomp_select_first(i: usize, dots: &[f64], state: &mut ControlState) -> Option<FirstSelection> {
    let masked = state.apply_mask(dots, i);
    let (index, fallback) = match argmax(&masked, i) {
        Some(j) => (j, false),
        None => (argmax(dots, i)?, true),
    };
    state.record(i, index);
    Some(FirstSelection { index, fallback })
}

fn argmax(values: &[f64], skip: usize) -> Option<usize> {
    let mut best = None;
    let mut best_val = 0.0;
    for (j, &v) in values.iter().enumerate() {
        if j != skip && v > best_val {
            best = Some(j);
            best_val = v;
        }
    }
    best
}

/// Who picked whom as a first neighbor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionLedger {
    /// Connection-1 target of each point.
    pub first_neighbor_of: Vec<Option<usize>>,
    /// Connection-2 tallies from budgeted (non-fallback) selections.
    pub incoming_first: Vec<usize>,
    /// Connection-2 tallies from fallback selections.
    pub fallback_incoming: Vec<usize>,
    /// Points whose first neighbor came from the fallback, ascending.
    pub fallback_points: Vec<usize>,
}

impl ConnectionLedger {
    fn new(n: usize) -> Self {
        ConnectionLedger {
            first_neighbor_of: vec![None; n],
            incoming_first: vec![0; n],
            fallback_incoming: vec![0; n],
            fallback_points: Vec::new(),
        }
    }

    pub fn fallback_count(&self) -> usize {
        self.fallback_points.len()
    }

    /// Largest budgeted incoming count; the restriction holds iff this is `≤ rcon`.
    pub fn max_incoming(&self) -> usize {
        self.incoming_first.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct RcompRun {
    pub coefficients: CoefficientMatrix,
    pub ledger: ConnectionLedger,
    pub state: ControlState,
}

/// Sequential first-neighbor pass in ascending point order, shared by all
/// points through one [`ControlState`].
fn first_pass(points: &DMatrix<f64>, params: &RcompParams) -> (Vec<Option<usize>>, ConnectionLedger, ControlState) {
    const CHUNK: usize = 256;
    let n = points.ncols();
    let mut state = ControlState::new(n, params.rcon).with_reciprocal_blocking(params.block_reciprocal);
    let mut ledger = ConnectionLedger::new(n);
    let mut firsts = vec![None; n];

    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        // r = x_i at the first iteration, so the products don't depend on the state
        let dots: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|i| abs_dots(points, &points.column(i).clone_owned()))
            .collect();

        for (i, d) in (start..end).zip(&dots) {
            if points.column(i).norm() <= params.eps {
                continue;
            }
            let Some(sel) = rcomp_select_first(i, d, &mut state) else {
                debug!("point {i}: no candidate for a first neighbor");
                continue;
            };
            firsts[i] = Some(sel.index);
            ledger.first_neighbor_of[i] = Some(sel.index);
            if sel.fallback {
                ledger.fallback_incoming[sel.index] += 1;
                ledger.fallback_points.push(i);
            } else {
                ledger.incoming_first[sel.index] += 1;
            }
        }
    }
    if !ledger.fallback_points.is_empty() {
        debug!("{} first selections used the fallback", ledger.fallback_count());
    }
    (firsts, ledger, state)
}

/// Full run, including the final control state.
pub fn rcomp_run(data: &Dataset, params: &RcompParams) -> Result<RcompRun> {
    params.validate()?;
    let n = data.len();
    if n < 2 {
        return Err(Error::DatasetTooSmall(n));
    }
    let points = data.points();
    let (firsts, ledger, state) = first_pass(points, params);

    let omp = params.omp();
    let columns = (0..n)
        .into_par_iter()
        .map(|i| match firsts[i] {
            Some(j) => code_point(points, i, &omp, Some(j)).entries,
            None => Vec::new(),
        })
        .collect();

    Ok(RcompRun {
        coefficients: CoefficientMatrix::from_columns(n, columns),
        ledger,
        state,
    })
}

pub fn rcomp_sparse_code(data: &Dataset, params: &RcompParams) -> Result<(CoefficientMatrix, ConnectionLedger)> {
    rcomp_run(data, params).map(|r| (r.coefficients, r.ledger))
}
