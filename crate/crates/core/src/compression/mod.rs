//! Layer compression: truncated SVD, bias compensation, DALR and the
//! activation-pruning baselines.

mod decompose;
mod metrics;
mod prune;
mod types;

pub use decompose::{
    bias_compensate, bias_compensate_with, compensate_with_vector, dalr_compress, dalr_compress_gram,
    ridge_augmentation_check, svd_truncate, BiasReduction, GramStats,
};
pub use metrics::{layer_output_error, parameter_fraction, reconstruction_error};
pub use prune::{matched_keep, prune_by_activation, unit_scores, PruneScore, PrunedLayer};
pub use types::{ActivationBatch, FactorPair, LinearLayer, Method, RidgeConfig};
