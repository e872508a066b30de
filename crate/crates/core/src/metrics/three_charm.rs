//! 3CharM: match each factor to its most disentangled latent and sum the
//! matched latents' gaps, normalized by the total factor entropy.
//!
//! 1. `j_i = argmax_j I[i][j]`, the factor latent `i` reflects most.
//! 2. `D_i = I[i][j_i] - max_{k != j_i} I[i][k]` (the second term is 0 when
//!    there is only one factor).
//! 3. For factor `j`, `k_j = argmax { D_i : j_i = j }`.
//! 4. `D^z_j = D_{k_j}`, or 0 when no latent picked factor `j`.
//! 5. score `= Σ_j D^z_j / Σ_j H(z_j)`.
//!
//! Every argmax breaks ties toward the smallest index.

use crate::error::{Error, Result};
use crate::matrix::{InformativenessMatrix, Provenance};
use crate::metrics::gap::top_two;
use crate::report::{Metric, MetricReport};

pub fn three_charm_score(matrix: &InformativenessMatrix) -> Result<MetricReport> {
    let metric = Metric::ThreeCharm;
    if !matches!(
        matrix.provenance,
        Provenance::MutualInformation | Provenance::External
    ) {
        return Err(Error::Contract(format!(
            "3charm needs a mutual-information matrix, got {:?}",
            matrix.provenance
        )));
    }
    let total_entropy: f64 = matrix.factor_entropies.iter().sum();
    if total_entropy <= 0.0 {
        return Err(Error::not_computable(
            metric.name(),
            "total factor entropy is zero",
        ));
    }
    let k = matrix.num_factors();

    let (chosen_factor, latent_gap): (Vec<usize>, Vec<f64>) = matrix
        .rows
        .iter()
        .map(|row| {
            if k == 1 {
                (0, row[0])
            } else {
                let (j, first, second) = top_two(row);
                (j, first - second)
            }
        })
        .unzip();

    let mut best_latent: Vec<Option<usize>> = vec![None; k];
    for (i, (&j, &d)) in chosen_factor.iter().zip(&latent_gap).enumerate() {
        match best_latent[j] {
            Some(prev) if latent_gap[prev] >= d => {}
            _ => best_latent[j] = Some(i),
        }
    }
    let factor_scores: Vec<f64> = best_latent
        .iter()
        .map(|b| b.map_or(0.0, |i| latent_gap[i]))
        .collect();
    let score = factor_scores.iter().sum::<f64>() / total_entropy;

    Ok(MetricReport::new(metric, score)
        .with("latent_factor", &chosen_factor)
        .with("latent_disentanglement", &latent_gap)
        .with("factor_latent", &best_latent)
        .with("factor_disentanglement", &factor_scores))
}
