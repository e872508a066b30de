//! The six disentanglement metrics. Each returns a [`MetricReport`] carrying
//! the score and the quantities it was derived from.
//!
//! [`MetricReport`]: crate::report::MetricReport

mod dci;
mod evaluate;
mod gap;
mod intervention;
mod three_charm;

pub use dci::{dci_from_dataset, dci_score, LOW_INFORMATIVENESS};
pub use evaluate::{evaluate_all, EvalConfig, EvalInput, NEEDS_DATASET, NEEDS_ORACLE};
pub use gap::{mig_score, sap_matrix, sap_score};
pub use intervention::{beta_vae_score, factor_vae_score, InterventionConfig, COLLAPSED_STD};
pub use three_charm::three_charm_score;
