//! Plug-in entropy and mutual information on discretized samples.

use serde::Serialize;

use crate::data::{FactorColumn, FactorKind, RepresentationDataset};
use crate::error::{Error, Result};
use crate::matrix::{InformativenessMatrix, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinStrategy {
    Quantile,
    EqualWidth,
}

impl std::str::FromStr for BinStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantile" => Ok(BinStrategy::Quantile),
            "equal-width" | "equal_width" => Ok(BinStrategy::EqualWidth),
            _ => Err(Error::InvalidParameter(format!("unknown bin strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinningSpec {
    pub strategy: BinStrategy,
    pub bin_count: usize,
}

impl Default for BinningSpec {
    fn default() -> Self {
        Self {
            strategy: BinStrategy::Quantile,
            bin_count: 20,
        }
    }
}

impl BinningSpec {
    pub fn new(strategy: BinStrategy, bin_count: usize) -> Result<Self> {
        if bin_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "bin_count must be >= 2, got {bin_count}"
            )));
        }
        Ok(Self {
            strategy,
            bin_count,
        })
    }
}

/// Maps each value to a bin label in `0..spec.bin_count`.
///
/// Quantile binning assigns by rank: the sample sorted by value (stable, so
/// ties keep input order) is cut into `bin_count` near-equal runs, and every
/// member of a group of equal values takes the label of the group's first
/// element. Equal values therefore always share a label, and a constant
/// input lands entirely in bin 0.
pub fn discretize(values: &[f64], spec: &BinningSpec) -> Vec<usize> {
    let n = values.len();
    let bins = spec.bin_count;
    if n == 0 {
        return Vec::new();
    }
    match spec.strategy {
        BinStrategy::Quantile => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let mut labels = vec![0; n];
            let mut group_label = 0;
            for (rank, &idx) in order.iter().enumerate() {
                if rank == 0 || values[idx] != values[order[rank - 1]] {
                    group_label = rank * bins / n;
                }
                labels[idx] = group_label;
            }
            labels
        }
        BinStrategy::EqualWidth => {
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let width = hi - lo;
            if width <= 0.0 {
                return vec![0; n];
            }
            values
                .iter()
                .map(|&v| (((v - lo) / width * bins as f64) as usize).min(bins - 1))
                .collect()
        }
    }
}

fn counts(labels: &[usize]) -> Vec<usize> {
    let size = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; size];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// Sums after sorting so the result does not depend on term order.
pub(crate) fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn entropy_from_counts(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    let terms = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .collect();
    ordered_sum(terms).max(0.0)
}

/// Plug-in entropy in nats.
pub fn entropy(labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    entropy_from_counts(&counts(labels), labels.len())
}

/// Plug-in mutual information in nats, computed from the joint histogram.
///
/// Each cell contributes `p(a,b) ln(p(a,b) / (p(a) p(b)))`; the terms are
/// summed in sorted order, which makes the estimate exactly symmetric.
pub fn mutual_information(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!(
            "mutual_information: length mismatch ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Contract("mutual_information: empty input".into()));
    }
    let ca = counts(a);
    let cb = counts(b);
    let width = cb.len();
    let mut joint = vec![0usize; ca.len() * width];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * width + y] += 1;
    }
    let n = a.len() as f64;
    let terms = joint
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(cell, &c)| {
            let (x, y) = (cell / width, cell % width);
            let c = c as f64;
            (c / n) * (c * n / (ca[x] as f64 * cb[y] as f64)).ln()
        })
        .collect();
    Ok(ordered_sum(terms).max(0.0))
}

/// Labels used for a factor in MI estimation: native labels for discrete
/// factors with at most `bin_count` values, quantile/width bins otherwise.
pub fn encode_factor(column: &FactorColumn, spec: &BinningSpec) -> Vec<usize> {
    match column.kind {
        FactorKind::Discrete { cardinality } if cardinality <= spec.bin_count => {
            column.values.iter().map(|&v| v as usize).collect()
        }
        _ => discretize(&column.values, spec),
    }
}

/// MI-based informativeness matrix `I[i][j] = MI(bin(c_i), enc(z_j))` with
/// the encoded factor entropies.
pub fn informativeness_from_mi(
    dataset: &RepresentationDataset,
    spec: &BinningSpec,
) -> Result<InformativenessMatrix> {
    let factor_labels: Vec<Vec<usize>> = dataset
        .factors
        .iter()
        .map(|f| encode_factor(f, spec))
        .collect();
    let entropies: Vec<f64> = factor_labels.iter().map(|l| entropy(l)).collect();
    let mut rows = Vec::with_capacity(dataset.num_latents());
    for latent in &dataset.latents {
        let labels = discretize(&latent.values, spec);
        let row = factor_labels
            .iter()
            .zip(&entropies)
            .map(|(fl, &h)| Ok(mutual_information(&labels, fl)?.min(h)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    InformativenessMatrix::new(rows, entropies, Provenance::MutualInformation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LatentColumn;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn quantile(bins: usize) -> BinningSpec {
        BinningSpec::new(BinStrategy::Quantile, bins).unwrap()
    }

    #[test]
    fn quantile_two_bins_splits_in_half() {
        assert_eq!(discretize(&[1.0, 2.0, 3.0, 4.0], &quantile(2)), vec![0, 0, 1, 1]);
        assert_eq!(discretize(&[4.0, 1.0, 3.0, 2.0], &quantile(2)), vec![1, 0, 1, 0]);
    }

    #[test]
    fn constant_input_is_bin_zero() {
        let v = vec![3.5; 17];
        assert!(discretize(&v, &quantile(5)).iter().all(|&l| l == 0));
        let ew = BinningSpec::new(BinStrategy::EqualWidth, 5).unwrap();
        assert!(discretize(&v, &ew).iter().all(|&l| l == 0));
    }

    #[test]
    fn quantile_bins_are_balanced_on_uniform_draws() {
        let mut rng = stream_rng(11, 0);
        let v: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let labels = discretize(&v, &quantile(20));
        let c = counts(&labels);
        assert_eq!(c.len(), 20);
        for &count in &c {
            assert!((45..=55).contains(&count), "bin count {count}");
        }
    }

    #[test]
    fn equal_width_covers_range() {
        let ew = BinningSpec::new(BinStrategy::EqualWidth, 4).unwrap();
        assert_eq!(discretize(&[0.0, 0.3, 0.6, 1.0], &ew), vec![0, 1, 2, 3]);
    }

    #[test]
    fn bin_count_below_two_is_rejected() {
        assert!(BinningSpec::new(BinStrategy::Quantile, 1).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[0, 1, 2, 3]) - 4f64.ln()).abs() < 1e-12);
        assert_eq!(entropy(&[2, 2, 2]), 0.0);
        // p = (1/2, 1/4, 1/4): 0.5 ln 2 + 2 * 0.25 ln 4 = 1.5 ln 2
        let h = entropy(&[0, 0, 1, 2]);
        let hand = -(0.5 * 0.5f64.ln() + 2.0 * 0.25 * 0.25f64.ln());
        assert!((h - hand).abs() < 1e-12);
        assert!((h - 1.0397).abs() < 1e-4);
    }

    #[test]
    fn mi_of_identical_labels_is_entropy() {
        let a = [0, 1, 2, 2, 1, 0, 3];
        assert!((mutual_information(&a, &a).unwrap() - entropy(&a)).abs() < 1e-12);
    }

    #[test]
    fn mi_of_independent_joint_is_zero() {
        // full product of two uniform variables: each cell once
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for x in 0..3 {
            for y in 0..4 {
                a.push(x);
                b.push(y);
            }
        }
        assert!(mutual_information(&a, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn mi_of_diagonal_joint_is_ln2() {
        let a: Vec<usize> = (0..100).map(|i| usize::from(i >= 50)).collect();
        let mi = mutual_information(&a, &a.clone()).unwrap();
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn mi_length_mismatch_is_an_error() {
        assert!(matches!(
            mutual_information(&[0, 1], &[0]),
            Err(Error::Contract(_))
        ));
    }

    fn ds(factors: Vec<FactorColumn>, latents: Vec<Vec<f64>>) -> RepresentationDataset {
        let latents = latents
            .into_iter()
            .enumerate()
            .map(|(i, v)| LatentColumn::new(format!("c_{i}"), v))
            .collect();
        RepresentationDataset::new(factors, latents).unwrap()
    }

    #[test]
    fn exact_copy_of_discrete_factor_reaches_its_entropy() {
        let z: Vec<f64> = (0..800).map(|i| (i % 8) as f64).collect();
        let d = ds(vec![FactorColumn::discrete("z", 8, z.clone())], vec![z]);
        let m = informativeness_from_mi(&d, &BinningSpec::default()).unwrap();
        assert!((m.factor_entropies[0] - 8f64.ln()).abs() < 1e-12);
        assert!((m.get(0, 0) - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn independent_noise_has_small_mi() {
        let mut rng = stream_rng(5, 0);
        let n = 10_000;
        let mut u = || (0..n).map(|_| rng.random::<f64>()).collect::<Vec<_>>();
        let factors = vec![
            FactorColumn::continuous("z1", u()),
            FactorColumn::continuous("z2", u()),
        ];
        let d = ds(factors, vec![u(), u(), u()]);
        let m = informativeness_from_mi(&d, &BinningSpec::default()).unwrap();
        for row in &m.rows {
            for &v in row {
                assert!(v < 0.05, "spurious MI {v}");
            }
        }
    }

    proptest! {
        #[test]
        fn mi_is_symmetric_and_bounded(
            pairs in prop::collection::vec((0usize..6, 0usize..5), 1..300)
        ) {
            let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let ab = mutual_information(&a, &b).unwrap();
            let ba = mutual_information(&b, &a).unwrap();
            prop_assert_eq!(ab.to_bits(), ba.to_bits());
            prop_assert!(ab >= 0.0);
            prop_assert!(ab <= entropy(&a).min(entropy(&b)) + 1e-9);
        }

        #[test]
        fn uniform_entropy_is_log_m(m in 1usize..60, reps in 1usize..8) {
            let labels: Vec<usize> = (0..m * reps).map(|i| i % m).collect();
            prop_assert!((entropy(&labels) - (m as f64).ln()).abs() < 1e-12);
        }

        #[test]
        fn quantile_labels_survive_monotone_maps(
            values in prop::collection::vec(-5.0f64..5.0, 1..200),
            bins in 2usize..25,
        ) {
            let spec = quantile(bins);
            let mapped: Vec<f64> = values.iter().map(|v| v.exp() * 3.0 + v.powi(3)).collect();
            prop_assert_eq!(discretize(&values, &spec), discretize(&mapped, &spec));
        }
    }
}
