use serde::{Deserialize, Serialize};

/// Summary of one layer compression run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    /// `svd`, `svd-bc`, `dalr`, `prune-mean` or `prune-max`.
    pub method: String,
    pub layer: usize,
    /// Rank for decompositions; kept units for pruning.
    pub k: usize,
    pub lambda: f64,
    pub parameter_fraction: f64,
    /// `||Y - Y_hat||_F` of the compressed layer's outputs.
    pub epsilon: f64,
    /// Which inputs `epsilon` was measured on.
    pub epsilon_batch: String,
    pub accuracy_before: Option<f64>,
    pub accuracy_after: Option<f64>,
    pub wall_clock_seconds: f64,
}
