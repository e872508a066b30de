//! BetaVAE and FactorVAE: metrics that hold one factor fixed and ask a
//! classifier to recover which one it was.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{fit_linear_classifier, majority_vote, LogisticConfig};
use crate::oracle::RepresentationOracle;
use crate::report::{Metric, MetricReport};
use crate::rng::{stream_rng, streams, SeededRng, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterventionConfig {
    pub train_points: usize,
    pub eval_points: usize,
    pub batch_size: usize,
    /// Draws used for FactorVAE's per-dimension reference std.
    pub reference_points: usize,
    pub seed: u64,
    pub logistic: LogisticConfig,
}

impl Default for InterventionConfig {
    fn default() -> Self {
        Self {
            train_points: 10_000,
            eval_points: 2_000,
            batch_size: 128,
            reference_points: 10_000,
            seed: DEFAULT_SEED,
            logistic: LogisticConfig::default(),
        }
    }
}

impl InterventionConfig {
    fn check(&self, metric: Metric) -> Result<()> {
        if self.batch_size < 2 || self.train_points < 1 || self.eval_points < 1 {
            return Err(Error::InvalidParameter(format!(
                "{metric}: batch_size must be >= 2 and point counts >= 1"
            )));
        }
        Ok(())
    }

    fn point_rng(&self, held_out: bool, index: usize) -> SeededRng {
        let base = if held_out {
            streams::EVAL_POINT_BASE
        } else {
            streams::TRAIN_POINT_BASE
        };
        stream_rng(self.seed, base + index as u64)
    }
}

fn per_class_accuracy(predicted: &[usize], labels: &[usize], classes: usize) -> Vec<f64> {
    let mut hits = vec![0usize; classes];
    let mut seen = vec![0usize; classes];
    for (&p, &y) in predicted.iter().zip(labels) {
        seen[y] += 1;
        if p == y {
            hits[y] += 1;
        }
    }
    hits.iter()
        .zip(&seen)
        .map(|(&h, &s)| if s == 0 { 0.0 } else { h as f64 / s as f64 })
        .collect()
}

fn accuracy(predicted: &[usize], labels: &[usize]) -> f64 {
    let hits = predicted.iter().zip(labels).filter(|(p, y)| p == y).count();
    hits as f64 / labels.len() as f64
}

/// One BetaVAE training point: mean absolute latent difference over
/// `batch_size` pairs that share the value of a randomly chosen factor.
fn beta_vae_point(
    oracle: &dyn RepresentationOracle,
    batch_size: usize,
    rng: &mut SeededRng,
) -> (Vec<f64>, usize) {
    let k = oracle.num_factors();
    let r = rng.random_range(0..k);
    let mut diff = vec![0.0; oracle.num_latents()];
    for _ in 0..batch_size {
        let v = oracle.sample_factor(r, rng);
        let (_, c1) = oracle.sample(Some((r, v)), rng);
        let (_, c2) = oracle.sample(Some((r, v)), rng);
        for ((d, a), b) in diff.iter_mut().zip(&c1).zip(&c2) {
            *d += (a - b).abs();
        }
    }
    for d in &mut diff {
        *d /= batch_size as f64;
    }
    (diff, r)
}

pub fn beta_vae_score(
    oracle: &dyn RepresentationOracle,
    config: &InterventionConfig,
) -> Result<MetricReport> {
    let metric = Metric::BetaVae;
    config.check(metric)?;
    let k = oracle.num_factors();
    if k < 2 {
        return Err(Error::not_computable(
            metric.name(),
            "needs at least 2 factors for the classifier",
        ));
    }
    let points = |held_out: bool, count: usize| -> (Vec<Vec<f64>>, Vec<usize>) {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = config.point_rng(held_out, i);
                beta_vae_point(oracle, config.batch_size, &mut rng)
            })
            .unzip()
    };
    let (train_x, train_y) = points(false, config.train_points);
    let (eval_x, eval_y) = points(true, config.eval_points);

    let clf = fit_linear_classifier(&train_x, &train_y, &config.logistic).map_err(|e| match e {
        Error::DegenerateLabels(m) => Error::not_computable(metric.name(), m),
        other => other,
    })?;
    let train_acc = clf.accuracy(&train_x, &train_y);
    let predicted: Vec<usize> = eval_x.iter().map(|x| clf.predict(x)).collect();
    let score = accuracy(&predicted, &eval_y);

    Ok(MetricReport::new(metric, score)
        .with("train_accuracy", train_acc)
        .with("eval_accuracy", score)
        .with("per_class_accuracy", per_class_accuracy(&predicted, &eval_y, k))
        .with("classifier_weights", &clf.weights)
        .with_config("train_points", config.train_points)
        .with_config("eval_points", config.eval_points)
        .with_config("batch_size", config.batch_size)
        .with_config("learning_rate", config.logistic.learning_rate)
        .with_config("epochs", config.logistic.epochs)
        .with_seed(config.seed))
}

/// Dimensions whose reference std falls below this are left out of the
/// FactorVAE variance argmin.
pub const COLLAPSED_STD: f64 = 1e-8;

fn reference_std(
    oracle: &dyn RepresentationOracle,
    config: &InterventionConfig,
) -> Vec<f64> {
    let mut rng = stream_rng(config.seed, streams::REFERENCE);
    let n = config.reference_points.max(2);
    let dims = oracle.num_latents();
    let mut samples = vec![Vec::with_capacity(n); dims];
    for _ in 0..n {
        let (_, c) = oracle.sample(None, &mut rng);
        for (col, v) in samples.iter_mut().zip(c) {
            col.push(v);
        }
    }
    samples
        .iter()
        .map(|col| {
            let m = col.iter().sum::<f64>() / n as f64;
            (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt()
        })
        .collect()
}

/// One FactorVAE training point: `(dimension with the lowest normalized
/// variance, fixed factor)`.
fn factor_vae_point(
    oracle: &dyn RepresentationOracle,
    scale: &[f64],
    active: &[usize],
    batch_size: usize,
    rng: &mut SeededRng,
) -> (usize, usize) {
    let k = oracle.num_factors();
    let r = rng.random_range(0..k);
    let v = oracle.sample_factor(r, rng);
    let dims = oracle.num_latents();
    let mut sum = vec![0.0; dims];
    let mut sum_sq = vec![0.0; dims];
    for _ in 0..batch_size {
        let (_, c) = oracle.sample(Some((r, v)), rng);
        for d in 0..dims {
            let x = c[d] / scale[d];
            sum[d] += x;
            sum_sq[d] += x * x;
        }
    }
    let b = batch_size as f64;
    let mut best = active[0];
    let mut best_var = f64::INFINITY;
    for &d in active {
        let var = (sum_sq[d] - sum[d] * sum[d] / b) / (b - 1.0);
        if var < best_var {
            best_var = var;
            best = d;
        }
    }
    (best, r)
}

pub fn factor_vae_score(
    oracle: &dyn RepresentationOracle,
    config: &InterventionConfig,
) -> Result<MetricReport> {
    let metric = Metric::FactorVae;
    config.check(metric)?;
    let k = oracle.num_factors();
    if k < 2 {
        return Err(Error::not_computable(
            metric.name(),
            "needs at least 2 factors for the classifier",
        ));
    }
    let std = reference_std(oracle, config);
    let active: Vec<usize> = (0..std.len()).filter(|&d| std[d] >= COLLAPSED_STD).collect();
    if active.is_empty() {
        return Err(Error::not_computable(
            metric.name(),
            "every latent dimension has collapsed (reference std < 1e-8)",
        ));
    }
    let scale: Vec<f64> = std.iter().map(|&s| if s >= COLLAPSED_STD { s } else { 1.0 }).collect();

    let points = |held_out: bool, count: usize| -> Vec<(usize, usize)> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = config.point_rng(held_out, i);
                factor_vae_point(oracle, &scale, &active, config.batch_size, &mut rng)
            })
            .collect()
    };
    let train = points(false, config.train_points);
    let eval = points(true, config.eval_points);

    let table = majority_vote(&train);
    let train_acc = table.accuracy(&train);
    let predicted: Vec<usize> = eval.iter().map(|&(d, _)| table.predict(d)).collect();
    let labels: Vec<usize> = eval.iter().map(|&(_, r)| r).collect();
    let score = accuracy(&predicted, &labels);

    Ok(MetricReport::new(metric, score)
        .with("train_accuracy", train_acc)
        .with("eval_accuracy", score)
        .with("per_class_accuracy", per_class_accuracy(&predicted, &labels, k))
        .with("votes", &table.votes)
        .with("reference_std", &std)
        .with("active_dimensions", &active)
        .with_config("train_points", config.train_points)
        .with_config("eval_points", config.eval_points)
        .with_config("batch_size", config.batch_size)
        .with_config("reference_points", config.reference_points)
        .with_seed(config.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn quick() -> InterventionConfig {
        InterventionConfig {
            train_points: 1000,
            eval_points: 500,
            batch_size: 64,
            reference_points: 2000,
            ..InterventionConfig::default()
        }
    }

    #[test]
    fn identity_oracle_is_separable() {
        let oracle = synth::identity_oracle(3);
        assert!(beta_vae_score(&oracle, &quick()).unwrap().value() >= 0.98);
        assert!(factor_vae_score(&oracle, &quick()).unwrap().value() >= 0.98);
    }

    #[test]
    fn noise_latents_score_at_chance() {
        let oracle = synth::noise_oracle(3, 3);
        let b = beta_vae_score(&oracle, &quick()).unwrap().value();
        let f = factor_vae_score(&oracle, &quick()).unwrap().value();
        assert!((b - 1.0 / 3.0).abs() < 0.1, "betavae {b}");
        assert!((f - 1.0 / 3.0).abs() < 0.1, "factorvae {f}");
    }

    #[test]
    fn single_factor_is_not_computable() {
        let oracle = synth::identity_oracle(1);
        assert!(matches!(
            beta_vae_score(&oracle, &quick()),
            Err(Error::NotComputable { .. })
        ));
        assert!(matches!(
            factor_vae_score(&oracle, &quick()),
            Err(Error::NotComputable { .. })
        ));
    }

    #[test]
    fn collapsed_latents_are_not_computable() {
        let oracle = synth::constant_oracle(3, 2);
        let err = factor_vae_score(&oracle, &quick()).unwrap_err();
        assert!(err.to_string().contains("collapsed"), "{err}");
    }

    #[test]
    fn same_seed_same_report() {
        let oracle = synth::betavae_counterexample();
        let a = beta_vae_score(&oracle, &quick()).unwrap();
        let b = beta_vae_score(&oracle, &quick()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
