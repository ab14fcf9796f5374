use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, Source};
use crate::error::{Error, Result};

/// Union of `n_subspaces` random `subspace_dim`-dimensional linear subspaces
/// of `R^ambient_dim`, sampled with additive ambient Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_subspaces: usize,
    pub subspace_dim: usize,
    pub ambient_dim: usize,
    pub points_per_subspace: usize,
    /// Expected norm of the noise vector relative to the unit-norm clean point.
    pub noise_rate: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.n_subspaces < 1 {
            return bad("n_subspaces must be >= 1".into());
        }
        if self.subspace_dim < 1 || self.subspace_dim > self.ambient_dim {
            return bad(format!(
                "subspace_dim {} must lie in [1, ambient_dim = {}]",
                self.subspace_dim, self.ambient_dim
            ));
        }
        if self.points_per_subspace < 1 {
            return bad("points_per_subspace must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return bad(format!("noise_rate {} outside [0, 1]", self.noise_rate));
        }
        Ok(())
    }

    pub fn total_points(&self) -> usize {
        self.n_subspaces * self.points_per_subspace
    }
}

/// Orthonormal `D × d` basis from the thin QR of a Gaussian matrix.
fn random_basis(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// Draws the dataset together with the generating bases.
pub(crate) fn generate_with_bases(config: &SynthConfig) -> Result<(Dataset, Vec<DMatrix<f64>>)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ambient = config.ambient_dim;
    let sigma = config.noise_rate / (ambient as f64).sqrt();

    let bases: Vec<DMatrix<f64>> = (0..config.n_subspaces)
        .map(|_| random_basis(ambient, config.subspace_dim, &mut rng))
        .collect();

    let n = config.total_points();
    let mut points = DMatrix::zeros(ambient, n);
    let mut labels = Vec::with_capacity(n);
    for (s, basis) in bases.iter().enumerate() {
        for p in 0..config.points_per_subspace {
            let mut g = DVector::from_fn(config.subspace_dim, |_, _| StandardNormal.sample(&mut rng));
            let norm = g.norm();
            g /= norm;
            let mut x = basis * g;
            if sigma > 0.0 {
                for v in x.iter_mut() {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    *v += sigma * e;
                }
            }
            points.set_column(s * config.points_per_subspace + p, &x);
            labels.push(s);
        }
    }
    Ok((Dataset::new(points, Some(labels), Source::Synthetic)?, bases))
}

/// Seeded union-of-subspaces sample; labels give the generating subspace.
pub fn generate_synthetic(config: &SynthConfig) -> Result<Dataset> {
    generate_with_bases(config).map(|(d, _)| d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::lstsq_project;

    fn cfg(n: usize, d: usize, amb: usize, pps: usize, noise: f64, seed: u64) -> SynthConfig {
        SynthConfig {
            n_subspaces: n,
            subspace_dim: d,
            ambient_dim: amb,
            points_per_subspace: pps,
            noise_rate: noise,
            seed,
        }
    }

    #[test]
    fn noiseless_points_lie_in_their_subspace() {
        let c = cfg(3, 6, 40, 200, 0.0, 42);
        let (data, bases) = generate_with_bases(&c).unwrap();
        assert_eq!(data.dim(), 40);
        assert_eq!(data.len(), 600);
        let labels = data.labels().unwrap();
        for (i, &l) in labels.iter().enumerate() {
            assert_eq!(l, i / 200);
            let x = data.points().column(i).clone_owned();
            assert!((x.norm() - 1.0).abs() < 1e-9);
            let p = lstsq_project(&x, &bases[l]);
            assert!(p.residual.norm() < 1e-9);
        }
    }

    #[test]
    fn rank_one_points_are_parallel() {
        let data = generate_synthetic(&cfg(1, 1, 3, 5, 0.0, 9)).unwrap();
        let x = data.points();
        for i in 0..5 {
            for j in 0..5 {
                let dot = x.column(i).dot(&x.column(j)).abs();
                assert!((dot - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let c = cfg(2, 3, 10, 20, 0.5, 1234);
        let a = generate_synthetic(&c).unwrap();
        let b = generate_synthetic(&c).unwrap();
        let bits = |d: &Dataset| d.points().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let other = generate_synthetic(&SynthConfig { seed: 1235, ..c }).unwrap();
        assert_ne!(bits(&a), bits(&other));
    }

    #[test]
    fn noise_moves_points_off_subspace() {
        let (data, bases) = generate_with_bases(&cfg(1, 2, 20, 50, 0.8, 3)).unwrap();
        let mean_res: f64 = (0..50)
            .map(|i| lstsq_project(&data.points().column(i).clone_owned(), &bases[0]).residual.norm())
            .sum::<f64>()
            / 50.0;
        assert!(mean_res > 0.3, "mean residual {mean_res}");
    }

    #[test]
    fn invalid_configs() {
        assert!(generate_synthetic(&cfg(0, 1, 3, 5, 0.0, 0)).is_err());
        assert!(generate_synthetic(&cfg(1, 4, 3, 5, 0.0, 0)).is_err());
        assert!(generate_synthetic(&cfg(1, 1, 3, 0, 0.0, 0)).is_err());
        assert!(generate_synthetic(&cfg(1, 1, 3, 5, 1.5, 0)).is_err());
    }
}
