//! Dense numerical kernels shared by the coders and the spectral stage.

mod eigen;
mod kmeans;
mod lstsq;

pub use eigen::{sym_eigs, EigenResult, SYMMETRY_TOL};
pub use kmeans::{kmeans, kmeans_detailed, KmeansOptions, KmeansRun, DEFAULT_RESTARTS, MAX_LLOYD_ITERS};
pub use lstsq::{lstsq_project, Projection, PIVOT_TOL};
