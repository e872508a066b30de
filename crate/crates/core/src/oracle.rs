//! Interventional samplers: produce `(z, c)` pairs, optionally with one
//! generative factor held at a given value.

use crate::data::{FactorColumn, FactorKind, LatentColumn, RepresentationDataset};
use crate::error::Result;
use crate::rng::{stream_rng, streams, SeededRng};

/// A generative process composed with an encoder.
///
/// Implementations are stateless; all randomness comes from the `rng`
/// argument, so one oracle can be shared and each caller owns its stream.
pub trait RepresentationOracle: Send + Sync {
    fn name(&self) -> &str;

    fn factor_kinds(&self) -> Vec<FactorKind>;

    fn num_latents(&self) -> usize;

    fn num_factors(&self) -> usize {
        self.factor_kinds().len()
    }

    /// One draw from the marginal of factor `j`.
    fn sample_factor(&self, j: usize, rng: &mut SeededRng) -> f64;

    /// Latent code for factor vector `z`; may consume randomness.
    fn encode(&self, z: &[f64], rng: &mut SeededRng) -> Vec<f64>;

    /// Draws one pair. When `fixed = Some((j, v))`, `z[j] == v` exactly and the
    /// other factors come from their marginals.
    fn sample(&self, fixed: Option<(usize, f64)>, rng: &mut SeededRng) -> (Vec<f64>, Vec<f64>) {
        let z: Vec<f64> = (0..self.num_factors())
            .map(|j| match fixed {
                Some((fj, v)) if fj == j => v,
                _ => self.sample_factor(j, rng),
            })
            .collect();
        let c = self.encode(&z, rng);
        (z, c)
    }
}

/// Draws `n` unconstrained samples from `oracle` into a dataset.
pub fn sample_dataset(
    oracle: &dyn RepresentationOracle,
    n: usize,
    seed: u64,
) -> Result<RepresentationDataset> {
    let mut rng = stream_rng(seed, streams::DATASET);
    let kinds = oracle.factor_kinds();
    let mut zs = vec![Vec::with_capacity(n); kinds.len()];
    let mut cs = vec![Vec::with_capacity(n); oracle.num_latents()];
    for _ in 0..n {
        let (z, c) = oracle.sample(None, &mut rng);
        for (col, v) in zs.iter_mut().zip(z) {
            col.push(v);
        }
        for (col, v) in cs.iter_mut().zip(c) {
            col.push(v);
        }
    }
    let factors = kinds
        .into_iter()
        .zip(zs)
        .enumerate()
        .map(|(j, (kind, values))| FactorColumn {
            name: format!("z_{}", j + 1),
            kind,
            values,
        })
        .collect();
    let latents = cs
        .into_iter()
        .enumerate()
        .map(|(i, values)| LatentColumn::new(format!("c_{}", i + 1), values))
        .collect();
    RepresentationDataset::new(factors, latents)
}
