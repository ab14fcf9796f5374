//! Sparse subspace clustering by restricted-connection orthogonal matching
//! pursuit.
//!
//! The pipeline is: unit-norm data ([`dataset`]) → greedy self-expressive
//! coding ([`omp`] or [`rcomp`]) → symmetric affinity and normalized spectral
//! clustering ([`spectral`]) → evaluation ([`metrics`]). [`experiment`] wires
//! the stages together for single runs and parameter sweeps.

pub mod coefficients;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod numerics;
pub mod omp;
pub mod rcomp;
pub mod spectral;

pub use coefficients::CoefficientMatrix;
pub use dataset::{Dataset, Source, SynthConfig};
pub use error::{Error, Result};
pub use experiment::{DataSource, ExperimentConfig, Method, SweepAxis, SweepConfig, SweepRow};
pub use metrics::EvalReport;
pub use omp::{omp_sparse_code, OmpParams};
pub use rcomp::{rcomp_sparse_code, ConnectionLedger, ControlState, RcompParams};
pub use spectral::{build_affinity, spectral_cluster, AffinityMatrix};
