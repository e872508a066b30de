use serde::Serialize;

use crate::data::RepresentationDataset;
use crate::error::{Error, Result};
use crate::estimators::{informativeness_from_mi, BinningSpec, ImportanceMethod};
use crate::matrix::InformativenessMatrix;
use crate::metrics::{
    beta_vae_score, dci_from_dataset, dci_score, factor_vae_score, mig_score, sap_score,
    three_charm_score, InterventionConfig,
};
use crate::oracle::{sample_dataset, RepresentationOracle};
use crate::report::{Metric, MetricReport};
use crate::rng::DEFAULT_SEED;

pub const NEEDS_ORACLE: &str = "requires interventional oracle";
pub const NEEDS_DATASET: &str = "requires a dataset (per-latent regressions)";

/// What a metric run is applied to.
#[derive(Clone, Copy)]
pub enum EvalInput<'a> {
    Dataset(&'a RepresentationDataset),
    Oracle(&'a dyn RepresentationOracle),
    /// A precomputed informativeness matrix; DCI reads it as `P`.
    Matrix(&'a InformativenessMatrix),
}

impl EvalInput<'_> {
    /// Metrics that can run on this kind of input.
    pub fn computable(&self) -> Vec<Metric> {
        match self {
            EvalInput::Dataset(_) => Metric::DATASET.to_vec(),
            EvalInput::Oracle(_) => Metric::ALL.to_vec(),
            EvalInput::Matrix(_) => vec![Metric::Dci, Metric::Mig, Metric::ThreeCharm],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub binning: BinningSpec,
    pub importance: ImportanceMethod,
    pub intervention: InterventionConfig,
    /// Samples drawn from an oracle for the dataset-based metrics.
    pub oracle_samples: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            binning: BinningSpec::default(),
            importance: ImportanceMethod::default(),
            intervention: InterventionConfig::default(),
            oracle_samples: 10_000,
            seed: DEFAULT_SEED,
        }
    }
}

impl EvalConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.intervention.seed = seed;
        self
    }
}

#[derive(Serialize)]
struct BinningConfig {
    bins: usize,
    bin_strategy: crate::estimators::BinStrategy,
}

fn skip_on_incomputable(metric: Metric, result: Result<MetricReport>) -> Result<MetricReport> {
    match result {
        Err(Error::NotComputable { reason, .. }) => Ok(MetricReport::skipped(metric, reason)),
        other => other,
    }
}

/// Runs each selected metric. Metrics that cannot run on this input, or that
/// turn out not to be computable, come back as skipped reports with a reason.
pub fn evaluate_all(
    input: EvalInput<'_>,
    metrics: &[Metric],
    config: &EvalConfig,
) -> Result<Vec<MetricReport>> {
    if metrics.is_empty() {
        return Err(Error::InvalidParameter("no metrics selected".into()));
    }
    let sampled;
    let dataset = match input {
        EvalInput::Dataset(ds) => Some(ds),
        EvalInput::Oracle(oracle)
            if metrics.iter().any(|m| !m.needs_oracle()) =>
        {
            sampled = sample_dataset(oracle, config.oracle_samples, config.seed)?;
            Some(&sampled)
        }
        _ => None,
    };
    let mi_needed = metrics
        .iter()
        .any(|m| matches!(m, Metric::Mig | Metric::ThreeCharm));
    let mi_matrix = match (input, dataset) {
        (EvalInput::Matrix(m), _) => Some(m.clone()),
        (_, Some(ds)) if mi_needed => Some(informativeness_from_mi(ds, &config.binning)?),
        _ => None,
    };
    let binning = BinningConfig {
        bins: config.binning.bin_count,
        bin_strategy: config.binning.strategy,
    };

    let mut reports = Vec::with_capacity(metrics.len());
    for &metric in metrics {
        let report = match (metric, input) {
            (Metric::BetaVae, EvalInput::Oracle(o)) => {
                skip_on_incomputable(metric, beta_vae_score(o, &config.intervention))?
            }
            (Metric::FactorVae, EvalInput::Oracle(o)) => {
                skip_on_incomputable(metric, factor_vae_score(o, &config.intervention))?
            }
            (Metric::BetaVae | Metric::FactorVae, _) => MetricReport::skipped(metric, NEEDS_ORACLE),
            (Metric::Sap, EvalInput::Matrix(_)) => MetricReport::skipped(metric, NEEDS_DATASET),
            (Metric::Sap, _) => {
                skip_on_incomputable(metric, sap_score(dataset.expect("dataset present")))?
            }
            (Metric::Dci, EvalInput::Matrix(m)) => {
                skip_on_incomputable(metric, m.as_importance().and_then(|p| dci_score(&p)))?
            }
            (Metric::Dci, _) => {
                let ds = dataset.expect("dataset present");
                skip_on_incomputable(
                    metric,
                    dci_from_dataset(ds, &config.importance, config.seed),
                )?
            }
            (Metric::Mig, _) => {
                let m = mi_matrix.as_ref().expect("matrix present");
                skip_on_incomputable(metric, mig_score(m))?.with_config("binning", &binning)
            }
            (Metric::ThreeCharm, _) => {
                let m = mi_matrix.as_ref().expect("matrix present");
                skip_on_incomputable(metric, three_charm_score(m))?
                    .with_config("binning", &binning)
            }
        };
        reports.push(report);
    }
    Ok(reports)
}
