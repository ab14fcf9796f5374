//! Fixtures shared by the criterion benches.

use rcomp_core::dataset::{generate_synthetic, Dataset, SynthConfig};

/// `n` subspaces of dimension 6 in `R^40`, the standard synthetic setting.
pub fn synthetic(points_per_subspace: usize, noise_rate: f64) -> Dataset {
    generate_synthetic(&SynthConfig {
        n_subspaces: 3,
        subspace_dim: 6,
        ambient_dim: 40,
        points_per_subspace,
        noise_rate,
        seed: 2024,
    })
    .expect("fixed config is valid")
}
