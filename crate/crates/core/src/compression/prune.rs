//! Activation-based pruning baselines: drop the output units of a layer that
//! respond least on the target batch.

use crate::compression::types::{ActivationBatch, LinearLayer};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneScore {
    /// Mean post-ReLU response over the batch.
    Mean,
    /// Maximum post-ReLU response over the batch.
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrunedLayer<T> {
    pub layer: LinearLayer<T>,
    /// Original indices of the retained units, ascending.
    pub kept: Vec<usize>,
}

/// Per-unit scores of `max(0, W x + b)` over the batch.
pub fn unit_scores<T: Scalar>(layer: &LinearLayer<T>, acts: &ActivationBatch<T>, score: PruneScore) -> Result<Vec<T>> {
    if acts.samples() == 0 {
        return Err(Error::EmptyBatch);
    }
    let response = layer.apply(acts.x())?.map(|v| v.max(T::zero()));
    let p = T::from_count(response.cols());
    Ok((0..response.rows())
        .map(|i| {
            let row = response.row(i);
            match score {
                PruneScore::Mean => row.iter().fold(T::zero(), |a, &v| a + v) / p,
                PruneScore::Max => row.iter().fold(T::zero(), |a, &v| a.max(v)),
            }
        })
        .collect())
}

/// Keeps the `keep` highest-scoring output rows. Equal scores favour the
/// lower index.
pub fn prune_by_activation<T: Scalar>(
    layer: &LinearLayer<T>,
    acts: &ActivationBatch<T>,
    keep: usize,
    score: PruneScore,
) -> Result<PrunedLayer<T>> {
    let m = layer.outputs();
    if keep == 0 || keep > m {
        return Err(Error::Range(format!("keep = {keep} must lie in 1..={m}")));
    }
    let scores = unit_scores(layer, acts, score)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).expect("finite scores"));
    let mut kept = order[..keep].to_vec();
    kept.sort_unstable();

    let weights = layer.weights().select_rows(&kept);
    let bias = kept.iter().map(|&i| layer.bias()[i]).collect();
    Ok(PrunedLayer {
        layer: LinearLayer::new(weights, bias)?,
        kept,
    })
}

/// Unit budget whose weight count matches a rank-`k` factorization of an
/// `m x n` layer: `round(k (m + n) / n)`, clamped to `1..=m`.
pub fn matched_keep(m: usize, n: usize, k: usize) -> usize {
    let keep = ((k * (m + n)) as f64 / n as f64).round() as usize;
    keep.clamp(1, m.max(1))
}
