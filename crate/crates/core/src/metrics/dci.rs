//! DCI disentanglement: importance-weighted average of per-latent
//! `1 - entropy_K` of the row-normalized importance matrix.

use crate::data::RepresentationDataset;
use crate::error::{Error, Result};
use crate::estimators::info::ordered_sum;
use crate::estimators::{feature_importances, ImportanceMethod};
use crate::matrix::ImportanceMatrix;
use crate::report::{Metric, MetricReport};

/// Mean explained-variance share below which `dci_from_dataset` flags the
/// importances as uninformative.
pub const LOW_INFORMATIVENESS: f64 = 0.05;

/// `1 + Σ_k p_k log_K p_k` with `0 log 0 = 0`. For `K = 1` a non-empty row is
/// trivially one-hot and scores 1.
fn one_minus_entropy(row: &[f64]) -> f64 {
    let k = row.len();
    if k == 1 {
        return 1.0;
    }
    let ln_k = (k as f64).ln();
    let sum: f64 = row
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln() / ln_k)
        .sum();
    (1.0 + sum).clamp(0.0, 1.0)
}

/// Rows with zero total importance get `H_K = 0` and weight `ρ = 0`.
pub fn dci_score(p: &ImportanceMatrix) -> Result<MetricReport> {
    let metric = Metric::Dci;
    let total = ordered_sum(p.rows.iter().flatten().copied().collect());
    if total <= 0.0 {
        return Err(Error::not_computable(
            metric.name(),
            "importance matrix is all zero",
        ));
    }
    let k = p.num_factors();
    let mut normalized = Vec::with_capacity(p.num_latents());
    let mut disentanglement = Vec::with_capacity(p.num_latents());
    let mut rho = Vec::with_capacity(p.num_latents());
    for row in &p.rows {
        let row_sum: f64 = row.iter().sum();
        if row_sum > 0.0 {
            let norm: Vec<f64> = row.iter().map(|v| v / row_sum).collect();
            disentanglement.push(one_minus_entropy(&norm));
            normalized.push(norm);
            rho.push(row_sum / total);
        } else {
            normalized.push(vec![0.0; k]);
            disentanglement.push(0.0);
            rho.push(0.0);
        }
    }
    let score = ordered_sum(rho.iter().zip(&disentanglement).map(|(r, h)| r * h).collect())
        .clamp(0.0, 1.0);
    Ok(MetricReport::new(metric, score)
        .with("normalized_importance", &normalized)
        .with("disentanglement_per_latent", &disentanglement)
        .with("rho", &rho))
}

/// Fits one regressor per factor, assembles `P`, and scores it.
pub fn dci_from_dataset(
    dataset: &RepresentationDataset,
    method: &ImportanceMethod,
    seed: u64,
) -> Result<MetricReport> {
    let k = dataset.num_factors();
    let n_lat = dataset.num_latents();
    let mut rows = vec![vec![0.0; k]; n_lat];
    let mut explained = Vec::with_capacity(k);
    for j in 0..k {
        let column = feature_importances(dataset, j, method, seed.wrapping_add(j as u64))?;
        for (row, p) in rows.iter_mut().zip(&column.importances) {
            row[j] = *p;
        }
        explained.push(column.explained_fraction);
    }
    let p = ImportanceMatrix::new(rows)?;
    let mean_explained = explained.iter().sum::<f64>() / k as f64;
    let report = dci_score(&p)?;
    Ok(report
        .with("importance", &p.rows)
        .with("explained_fraction", &explained)
        .with("low_informativeness_warning", mean_explained < LOW_INFORMATIVENESS)
        .with_config("importance_method", method.name())
        .with_seed(seed))
}
