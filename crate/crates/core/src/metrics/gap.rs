//! Column-gap metrics: SAP and MIG score each factor by how far its best
//! latent is ahead of the runner-up.

use crate::data::{FactorKind, RepresentationDataset};
use crate::error::{Error, Result};
use crate::estimators::{linear_regression_r2, stump_accuracy};
use crate::matrix::{InformativenessMatrix, Provenance};
use crate::report::{Metric, MetricReport};

/// `(argmax, top, runner-up)`; ties go to the smallest index. Needs two entries.
pub(crate) fn top_two(column: &[f64]) -> (usize, f64, f64) {
    let mut best = 0;
    for (i, &v) in column.iter().enumerate().skip(1) {
        if v > column[best] {
            best = i;
        }
    }
    let second = column
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    (best, column[best], second)
}

/// Per-latent predictability matrix used by SAP: R² of a linear fit for
/// continuous factors, rescaled threshold-classifier accuracy for discrete
/// ones.
pub fn sap_matrix(dataset: &RepresentationDataset) -> Result<InformativenessMatrix> {
    let mut rows = Vec::with_capacity(dataset.num_latents());
    for latent in &dataset.latents {
        let row = dataset
            .factors
            .iter()
            .map(|f| match f.kind {
                FactorKind::Continuous => linear_regression_r2(&latent.values, &f.values),
                FactorKind::Discrete { .. } => {
                    let labels: Vec<usize> = f.values.iter().map(|&v| v as usize).collect();
                    Ok(stump_accuracy(&latent.values, &labels))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let unit = vec![1.0; dataset.num_factors()];
    InformativenessMatrix::new(rows, unit, Provenance::LinearR2)
}

pub fn sap_score(dataset: &RepresentationDataset) -> Result<MetricReport> {
    let metric = Metric::Sap;
    if dataset.num_latents() < 2 {
        return Err(Error::not_computable(
            metric.name(),
            "needs at least 2 latents to form a gap",
        ));
    }
    let matrix = sap_matrix(dataset)?;
    let k = matrix.num_factors();
    let mut gaps = Vec::with_capacity(k);
    let mut top = Vec::with_capacity(k);
    for j in 0..k {
        let (i, first, second) = top_two(&matrix.column(j));
        gaps.push(first - second);
        top.push(i);
    }
    let score = (gaps.iter().sum::<f64>() / k as f64).clamp(0.0, 1.0);
    Ok(MetricReport::new(metric, score)
        .with("score_matrix", &matrix.rows)
        .with("gaps", &gaps)
        .with("top_latent", &top))
}

pub fn mig_score(matrix: &InformativenessMatrix) -> Result<MetricReport> {
    let metric = Metric::Mig;
    if !matches!(
        matrix.provenance,
        Provenance::MutualInformation | Provenance::External
    ) {
        return Err(Error::Contract(format!(
            "mig needs a mutual-information matrix, got {:?}",
            matrix.provenance
        )));
    }
    if matrix.num_latents() < 2 {
        return Err(Error::not_computable(
            metric.name(),
            "needs at least 2 latents to form a gap",
        ));
    }
    if let Some(j) = matrix.factor_entropies.iter().position(|&h| h <= 0.0) {
        return Err(Error::not_computable(
            metric.name(),
            format!("factor {} has zero entropy", j + 1),
        ));
    }
    let k = matrix.num_factors();
    let mut gaps = Vec::with_capacity(k);
    let mut top = Vec::with_capacity(k);
    for (j, &h) in matrix.factor_entropies.iter().enumerate() {
        let (i, first, second) = top_two(&matrix.column(j));
        gaps.push((first - second) / h);
        top.push(i);
    }
    let score = gaps.iter().sum::<f64>() / k as f64;
    Ok(MetricReport::new(metric, score)
        .with("normalized_gaps", &gaps)
        .with("top_latent", &top)
        .with("factor_entropies", &matrix.factor_entropies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FactorColumn, LatentColumn};

    fn ext(rows: Vec<Vec<f64>>, h: Vec<f64>) -> InformativenessMatrix {
        InformativenessMatrix::new(rows, h, Provenance::External).unwrap()
    }

    #[test]
    fn top_two_breaks_ties_low() {
        assert_eq!(top_two(&[0.5, 0.9, 0.9]), (1, 0.9, 0.9));
        assert_eq!(top_two(&[0.1, 0.0]), (0, 0.1, 0.0));
    }

    #[test]
    fn mig_one_nonzero_per_column_is_one() {
        let m = ext(vec![vec![0.0, 2.0], vec![1.5, 0.0], vec![0.0, 0.0]], vec![1.5, 2.0]);
        assert_eq!(mig_score(&m).unwrap().value(), 1.0);
    }

    #[test]
    fn mig_all_zero_is_zero() {
        let m = ext(vec![vec![0.0, 0.0]; 3], vec![1.0, 1.0]);
        assert_eq!(mig_score(&m).unwrap().value(), 0.0);
    }

    #[test]
    fn mig_rejects_zero_entropy_and_single_latent() {
        let m = ext(vec![vec![0.0, 0.0]; 2], vec![1.0, 0.0]);
        let err = mig_score(&m).unwrap_err().to_string();
        assert!(err.contains("factor 2"), "{err}");
        let m = ext(vec![vec![1.0]], vec![1.0]);
        assert!(matches!(mig_score(&m), Err(Error::NotComputable { .. })));
    }

    #[test]
    fn sap_identity_is_one() {
        let z1: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let z2: Vec<f64> = (0..200).map(|i| (i as f64 * 0.73).cos()).collect();
        let ds = RepresentationDataset::new(
            vec![
                FactorColumn::continuous("z1", z1.clone()),
                FactorColumn::continuous("z2", z2.clone()),
            ],
            vec![LatentColumn::new("c1", z1), LatentColumn::new("c2", z2)],
        )
        .unwrap();
        assert!((sap_score(&ds).unwrap().value() - 1.0).abs() < 0.01);
    }

    #[test]
    fn sap_needs_two_latents() {
        let ds = RepresentationDataset::new(
            vec![FactorColumn::continuous("z", vec![1.0, 2.0])],
            vec![LatentColumn::new("c", vec![1.0, 2.0])],
        )
        .unwrap();
        assert!(matches!(sap_score(&ds), Err(Error::NotComputable { .. })));
    }

    #[test]
    fn sap_discrete_factor_uses_threshold_classifier() {
        let z: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let clean: Vec<f64> = z.iter().map(|v| v * 3.0 - 1.0).collect();
        let junk: Vec<f64> = (0..100).map(|i| ((i * 7919) % 101) as f64).collect();
        let ds = RepresentationDataset::new(
            vec![FactorColumn::discrete("z", 2, z)],
            vec![LatentColumn::new("a", junk), LatentColumn::new("b", clean)],
        )
        .unwrap();
        let r = sap_score(&ds).unwrap();
        assert!(r.value() > 0.7, "{}", r.value());
        assert_eq!(r.intermediates["top_latent"], serde_json::json!([1]));
    }
}
