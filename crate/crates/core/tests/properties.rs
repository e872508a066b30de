use dismetrics::analysis::spearman;
use dismetrics::data::{dataset_to_csv, parse_dataset};
use dismetrics::estimators::{discretize, BinningSpec, ForestConfig, ImportanceMethod};
use dismetrics::metrics::{dci_from_dataset, dci_score, mig_score, sap_score, three_charm_score};
use dismetrics::oracle::RepresentationOracle;
use dismetrics::rng::stream_rng;
use dismetrics::synth::{betavae_counterexample, GeneratorSpec, GENERATORS};
use dismetrics::{
    FactorColumn, ImportanceMatrix, InformativenessMatrix, LatentColumn, Provenance,
    RepresentationDataset,
};
use proptest::prelude::*;

/// Informativeness matrix with entries bounded by their factor entropies.
fn mi_matrix() -> impl Strategy<Value = InformativenessMatrix> {
    (2usize..7, 1usize..5).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, k), n),
            prop::collection::vec(0.1f64..2.0, k),
        )
            .prop_map(|(fractions, h)| {
                let rows = fractions
                    .iter()
                    .map(|r| r.iter().zip(&h).map(|(f, h)| f * h).collect())
                    .collect();
                InformativenessMatrix::new(rows, h, Provenance::External).unwrap()
            })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn matrix_and_permutation() -> impl Strategy<Value = (InformativenessMatrix, Vec<usize>)> {
    mi_matrix().prop_flat_map(|m| {
        let n = m.num_latents();
        (Just(m), permutation(n))
    })
}

/// Small dataset: factors uniform, latents noisy mixtures of them.
fn dataset(seed: u64, n: usize, k: usize, latents: usize) -> RepresentationDataset {
    use rand::Rng;
    let mut rng = stream_rng(seed, 0);
    let z: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let weights: Vec<Vec<f64>> = (0..latents)
        .map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let c: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| {
            (0..n)
                .map(|r| {
                    let lin: f64 = w.iter().zip(&z).map(|(a, col)| a * col[r]).sum();
                    lin + 0.1 * rng.random_range(-1.0..1.0)
                })
                .collect()
        })
        .collect();
    RepresentationDataset::new(
        z.into_iter()
            .enumerate()
            .map(|(j, v)| FactorColumn::continuous(format!("z_{}", j + 1), v))
            .collect(),
        c.into_iter()
            .enumerate()
            .map(|(i, v)| LatentColumn::new(format!("c_{}", i + 1), v))
            .collect(),
    )
    .unwrap()
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_metrics_stay_in_unit_interval(m in mi_matrix()) {
        prop_assert!(in_unit(three_charm_score(&m).unwrap().value()));
        prop_assert!(in_unit(mig_score(&m).unwrap().value()));
        if let Ok(r) = dci_score(&m.as_importance().unwrap()) {
            prop_assert!(in_unit(r.value()));
        }
    }

    #[test]
    fn matrix_metrics_ignore_latent_order((m, perm) in matrix_and_permutation()) {
        let p = m.permute_latents(&perm);
        prop_assert_eq!(three_charm_score(&m).unwrap().value(), three_charm_score(&p).unwrap().value());
        prop_assert_eq!(mig_score(&m).unwrap().value(), mig_score(&p).unwrap().value());
        let d = dci_score(&m.as_importance().unwrap()).map(|r| r.value()).ok();
        let dp = dci_score(&p.as_importance().unwrap()).map(|r| r.value()).ok();
        prop_assert_eq!(d, dp);
    }

    #[test]
    fn duplicated_top_latent_zeroes_mig_gap_but_not_three_charm(m in mi_matrix()) {
        let column = m.column(0);
        let top = (0..column.len()).fold(0, |b, i| if column[i] > column[b] { i } else { b });
        let mut rows = m.rows.clone();
        rows.push(rows[top].clone());
        let dup = InformativenessMatrix::new(rows, m.factor_entropies.clone(), Provenance::External).unwrap();
        prop_assert_eq!(three_charm_score(&m).unwrap().value(), three_charm_score(&dup).unwrap().value());
        let gaps = mig_score(&dup).unwrap().vector("normalized_gaps").unwrap();
        prop_assert_eq!(gaps[0], 0.0);
    }

    #[test]
    fn dci_ignores_latent_order_on_importances(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..5.0, 3), 2..6),
        shuffle_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let p = ImportanceMatrix::new(rows).unwrap();
        let mut perm: Vec<usize> = (0..p.num_latents()).collect();
        perm.shuffle(&mut stream_rng(shuffle_seed, 0));
        let a = dci_score(&p).map(|r| r.value()).ok();
        let b = dci_score(&p.permute_latents(&perm)).map(|r| r.value()).ok();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn spearman_is_symmetric_and_rank_based(
        pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let (Ok(ab), Ok(ba)) = (spearman(&a, &b), spearman(&b, &a)) {
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
            let ranks_a = dismetrics::analysis::average_ranks(&a);
            let moved: Vec<f64> = ranks_a.iter().map(|r| r * r * r + 2.0 * r).collect();
            prop_assert!((spearman(&moved, &b).unwrap() - ab).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_exact(
        values in prop::collection::vec((any::<f64>(), any::<f64>(), 0usize..4), 1..40),
    ) {
        let clean = |x: f64| if x.is_finite() { x } else { 0.0 };
        let ds = RepresentationDataset::new(
            vec![
                FactorColumn::continuous("a", values.iter().map(|v| clean(v.0)).collect()),
                FactorColumn::discrete("b", 4, values.iter().map(|v| v.2 as f64).collect()),
            ],
            vec![LatentColumn::new("c", values.iter().map(|v| clean(v.1)).collect())],
        )
        .unwrap();
        let text = String::from_utf8(dataset_to_csv(&ds)).unwrap();
        let back = parse_dataset(&text, None).unwrap();
        for (x, y) in ds.factors.iter().zip(&back.factors) {
            prop_assert_eq!(x.kind, y.kind);
            prop_assert!(x.values.iter().zip(&y.values).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
        prop_assert!(ds.latents[0].values.iter().zip(&back.latents[0].values).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn quantile_bins_survive_affine_and_exp_maps(values in prop::collection::vec(-5.0f64..5.0, 5..200)) {
        let spec = BinningSpec::default();
        let a = discretize(&values, &spec);
        let scaled: Vec<f64> = values.iter().map(|v| 2.0 * v + 7.0).collect();
        prop_assert_eq!(&a, &discretize(&scaled, &spec));
        let neg: Vec<f64> = values.iter().map(|v| -(-v).exp()).collect();
        prop_assert_eq!(&a, &discretize(&neg, &spec));
    }

    #[test]
    fn fixed_factor_is_held_exactly(r in 0usize..3, v in 0.0f64..1.0, seed in any::<u64>()) {
        let oracle = betavae_counterexample();
        let mut rng = stream_rng(seed, 0);
        for _ in 0..20 {
            let (z, c) = oracle.sample(Some((r, v)), &mut rng);
            prop_assert_eq!(z[r], v);
            prop_assert_eq!(c.len(), 3);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generators_reproduce_and_validate(which in 0usize..GENERATORS.len(), seed in any::<u64>(), n in 1usize..60) {
        let spec = GeneratorSpec::parse(&format!("{}:n={n}", GENERATORS[which])).unwrap();
        let a = spec.generate(seed).unwrap();
        let b = spec.generate(seed).unwrap();
        prop_assert!(a.dataset.validate().is_pass());
        prop_assert_eq!(a.dataset, b.dataset);
        prop_assert_eq!(a.metadata, b.metadata);
    }

    #[test]
    fn dataset_metrics_ignore_latent_order(seed in any::<u64>(), perm in permutation(4)) {
        let ds = dataset(seed, 300, 2, 4);
        let p = ds.permute_latents(&perm);
        prop_assert_eq!(sap_score(&ds).unwrap().value(), sap_score(&p).unwrap().value());
        let spec = BinningSpec::default();
        let m = dismetrics::estimators::informativeness_from_mi(&ds, &spec).unwrap();
        let mp = dismetrics::estimators::informativeness_from_mi(&p, &spec).unwrap();
        prop_assert_eq!(mig_score(&m).unwrap().value(), mig_score(&mp).unwrap().value());
        prop_assert_eq!(three_charm_score(&m).unwrap().value(), three_charm_score(&mp).unwrap().value());
        let method = ImportanceMethod::Forest(ForestConfig { trees: 10, ..ForestConfig::default() });
        let d = dci_from_dataset(&ds, &method, 3).unwrap().value();
        let dp = dci_from_dataset(&p, &method, 3).unwrap().value();
        prop_assert!((d - dp).abs() < 1e-9, "{} vs {}", d, dp);
        prop_assert!(in_unit(d) && in_unit(sap_score(&ds).unwrap().value()));
    }
}
