//! Minimal feed-forward network of fully connected layers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::compression::{ActivationBatch, FactorPair, LinearLayer, Method};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// Nonlinearity applied after a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    None,
}

impl Activation {
    fn apply<T: Scalar>(self, m: DenseMatrix<T>) -> DenseMatrix<T> {
        match self {
            Activation::Relu => m.map(|v| v.max(T::zero())),
            Activation::None => m,
        }
    }
}

/// Where a layer was replaced by a factor pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpliceRecord {
    /// Index of the first of the two replacement layers in the current network.
    pub position: usize,
    pub method: Method,
    pub rank: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    layers: Vec<LinearLayer<T>>,
    activations: Vec<Activation>,
    /// Keyed by the index the replaced layer had before any splicing.
    splices: BTreeMap<usize, SpliceRecord>,
}

impl<T: Scalar> Network<T> {
    pub fn new(layers: Vec<LinearLayer<T>>, activations: Vec<Activation>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        if activations.len() != layers.len() {
            return Err(Error::Shape(format!(
                "{} layers but {} activations",
                layers.len(),
                activations.len()
            )));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::Shape(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    pair[0].outputs(),
                    i + 1,
                    pair[1].inputs()
                )));
            }
        }
        Ok(Self {
            layers,
            activations,
            splices: BTreeMap::new(),
        })
    }

    /// ReLU between layers, linear output.
    pub fn mlp(layers: Vec<LinearLayer<T>>) -> Result<Self> {
        let n = layers.len();
        let acts = (0..n)
            .map(|i| if i + 1 < n { Activation::Relu } else { Activation::None })
            .collect();
        Self::new(layers, acts)
    }

    pub(crate) fn with_splices(mut self, splices: BTreeMap<usize, SpliceRecord>) -> Result<Self> {
        for rec in splices.values() {
            if rec.position + 1 >= self.layers.len() {
                return Err(Error::Shape(format!(
                    "splice record at position {} is outside the network",
                    rec.position
                )));
            }
        }
        self.splices = splices;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layers(&self) -> &[LinearLayer<T>] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> Result<&LinearLayer<T>> {
        self.layers.get(i).ok_or_else(|| self.index_error(i))
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn splices(&self) -> &BTreeMap<usize, SpliceRecord> {
        &self.splices
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    /// Weights plus biases over all layers.
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(LinearLayer::parameter_count).sum()
    }

    fn index_error(&self, i: usize) -> Error {
        Error::Range(format!("layer index {i} outside 0..{}", self.layers.len()))
    }

    /// Final (pre-softmax) outputs for column inputs.
    pub fn forward(&self, inputs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let mut h = inputs.clone();
        for (layer, act) in self.layers.iter().zip(&self.activations) {
            h = act.apply(layer.apply(&h)?);
        }
        Ok(h)
    }

    /// Inputs to every layer followed by the final output (`len() + 1` entries).
    pub fn forward_capture(&self, inputs: &DenseMatrix<T>) -> Result<Vec<DenseMatrix<T>>> {
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        trace.push(inputs.clone());
        for (layer, act) in self.layers.iter().zip(&self.activations) {
            let next = act.apply(layer.apply(trace.last().expect("non-empty"))?);
            trace.push(next);
        }
        Ok(trace)
    }

    /// The batch feeding layer `index`, flagged post-ReLU when it follows one.
    pub fn extract_activations(&self, inputs: &DenseMatrix<T>, index: usize) -> Result<ActivationBatch<T>> {
        if index >= self.layers.len() {
            return Err(self.index_error(index));
        }
        if inputs.rows() != self.input_dim() {
            return Err(Error::dim(
                "extract_activations",
                self.layers[0].weights().shape(),
                inputs.shape(),
            ));
        }
        let mut h = inputs.clone();
        for (layer, act) in self.layers[..index].iter().zip(&self.activations) {
            h = act.apply(layer.apply(&h)?);
        }
        if index > 0 && self.activations[index - 1] == Activation::Relu {
            ActivationBatch::post_relu(h)
        } else {
            ActivationBatch::new(h)
        }
    }

    /// Replaces layer `index` with `b^T` (zero bias, no activation) followed by
    /// `a` (with the pair's bias and the original activation).
    pub fn splice(&self, index: usize, pair: &FactorPair<T>) -> Result<Self> {
        let layer = self.layer(index)?;
        if pair.outputs() != layer.outputs() || pair.inputs() != layer.inputs() {
            return Err(Error::dim(
                "splice",
                layer.weights().shape(),
                (pair.outputs(), pair.inputs()),
            ));
        }
        let first = LinearLayer::unbiased(pair.b.transpose());
        let second = LinearLayer::new(pair.a.clone(), pair.new_bias.clone())?;

        let mut layers = self.layers.clone();
        let mut activations = self.activations.clone();
        let act = activations[index];
        layers.splice(index..=index, [first, second]);
        activations.splice(index..=index, [Activation::None, act]);

        let original = self.original_index(index);
        let mut splices = BTreeMap::new();
        for (&orig, rec) in &self.splices {
            let mut rec = *rec;
            if rec.position > index {
                rec.position += 1;
            }
            splices.insert(orig, rec);
        }
        splices.insert(
            original,
            SpliceRecord {
                position: index,
                method: pair.method,
                rank: pair.rank(),
                lambda: pair.lambda.as_f64(),
            },
        );
        Ok(Self {
            layers,
            activations,
            splices,
        })
    }

    /// Index `current` had before any splicing.
    fn original_index(&self, current: usize) -> usize {
        current - self.splices.values().filter(|r| r.position < current).count()
    }

    /// Keeps only the listed output units of layer `index` and drops the
    /// matching input columns of the following layer.
    pub fn prune_units(&self, index: usize, kept: &[usize]) -> Result<Self> {
        let layer = self.layer(index)?;
        if index + 1 >= self.layers.len() {
            return Err(Error::Range("cannot prune the output layer".into()));
        }
        if kept.is_empty() || kept.iter().any(|&i| i >= layer.outputs()) {
            return Err(Error::Range(format!(
                "kept units must be a non-empty subset of 0..{}",
                layer.outputs()
            )));
        }
        let pruned = LinearLayer::new(
            layer.weights().select_rows(kept),
            kept.iter().map(|&i| layer.bias()[i]).collect(),
        )?;
        let next = &self.layers[index + 1];
        let next = LinearLayer::new(next.weights().select_cols(kept), next.bias().to_vec())?;
        let mut layers = self.layers.clone();
        layers[index] = pruned;
        layers[index + 1] = next;
        let mut net = Self::new(layers, self.activations.clone())?;
        net.splices = self.splices.clone();
        Ok(net)
    }

    /// Fraction of samples whose arg-max output equals the label.
    pub fn accuracy(&self, batch: &LabeledBatch<T>) -> Result<f64> {
        let out = self.forward(batch.inputs())?;
        let classes = out.rows();
        let mut correct = 0usize;
        for (j, &label) in batch.labels().iter().enumerate() {
            if label >= classes {
                return Err(Error::Label {
                    sample: j,
                    label,
                    classes,
                });
            }
            if argmax_column(&out, j) == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / batch.len() as f64)
    }
}

/// Row of the largest entry in column `j`; lowest index on ties.
pub fn argmax_column<T: Scalar>(m: &DenseMatrix<T>, j: usize) -> usize {
    let mut best = 0;
    for i in 1..m.rows() {
        if m[(i, j)] > m[(best, j)] {
            best = i;
        }
    }
    best
}

/// Network inputs (`n x p`) with one class label per column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch<T> {
    inputs: DenseMatrix<T>,
    labels: Vec<usize>,
}

impl<T: Scalar> LabeledBatch<T> {
    pub fn new(inputs: DenseMatrix<T>, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != inputs.cols() {
            return Err(Error::Shape(format!(
                "{} labels for {} samples",
                labels.len(),
                inputs.cols()
            )));
        }
        if labels.is_empty() {
            return Err(Error::EmptyBatch);
        }
        Ok(Self { inputs, labels })
    }

    pub fn inputs(&self) -> &DenseMatrix<T> {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
