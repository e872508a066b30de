//! Disentanglement metrics (BetaVAE, FactorVAE, DCI, SAP, MIG, 3CharM), the
//! estimators behind them, seeded synthetic representations, and tools for
//! comparing metrics against each other.

pub mod analysis;
pub mod data;
pub mod error;
pub mod estimators;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod oracle;
pub mod report;
pub mod reproduce;
pub mod rng;
pub mod synth;

pub use data::{
    load_dataset, save_dataset, FactorColumn, FactorKind, LatentColumn, RepresentationDataset,
    Schema,
};
pub use error::{Error, Result};
pub use matrix::{ImportanceMatrix, InformativenessMatrix, Provenance};
pub use metrics::{evaluate_all, EvalConfig, EvalInput};
pub use oracle::{sample_dataset, RepresentationOracle};
pub use report::{Metric, MetricReport};
