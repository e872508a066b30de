//! Statistical building blocks shared by the metrics.

pub mod classify;
pub mod forest;
pub mod info;
pub mod linear;

pub use classify::{
    fit_linear_classifier, majority_vote, stump_accuracy, LinearClassifier, LogisticConfig,
    MajorityVoteTable,
};
pub use forest::{
    feature_importances, forest_importances, ForestConfig, ImportanceColumn, ImportanceMethod,
};
pub use info::{
    discretize, encode_factor, entropy, informativeness_from_mi, mutual_information, BinStrategy,
    BinningSpec,
};
pub use linear::{lasso, linear_regression_r2, LassoConfig, LassoFit};
