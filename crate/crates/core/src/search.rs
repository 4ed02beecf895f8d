//! Greedy joint rank search over two layers.
//!
//! Each iteration tries one more schedule step on either layer, keeps the
//! candidate with the better validation accuracy, and stops once every
//! available candidate falls further than `max_drop` below the reference
//! accuracy.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use crate::compression::{
    bias_compensate, dalr_compress, parameter_fraction, svd_truncate, ActivationBatch, FactorPair, Method, RidgeConfig,
};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::network::{LabeledBatch, Network};
use crate::scalar::Scalar;

/// Reference accuracy for the stop rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Candidates are compared against the uncompressed network.
    #[default]
    Baseline,
    /// Candidates are compared against the accuracy of the previous step.
    Previous,
}

#[derive(Debug, Clone)]
pub struct SearchConfig<T> {
    /// Strictly descending ranks for the first layer; the first entry is the
    /// starting rank.
    pub schedule_a: Vec<usize>,
    pub schedule_b: Vec<usize>,
    pub max_drop: f64,
    pub method: Method,
    pub ridge: RidgeConfig<T>,
    pub stop_rule: StopRule,
    /// Training inputs to re-extract the downstream layer's activations from
    /// the partially compressed network. `None` uses the supplied batches.
    pub reextract_from: Option<DenseMatrix<T>>,
}

impl<T: Scalar> SearchConfig<T> {
    pub fn new(schedule_a: Vec<usize>, schedule_b: Vec<usize>) -> Self {
        Self {
            schedule_a,
            schedule_b,
            max_drop: 0.01,
            method: Method::Dalr,
            ridge: RidgeConfig::Auto,
            stop_rule: StopRule::Baseline,
            reextract_from: None,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, s) in [("a", &self.schedule_a), ("b", &self.schedule_b)] {
            if s.is_empty() {
                return Err(Error::Range(format!("rank schedule {name} is empty")));
            }
            if s.windows(2).any(|w| w[1] >= w[0]) || s.contains(&0) {
                return Err(Error::Range(format!(
                    "rank schedule {name} must be strictly descending positive ranks: {s:?}"
                )));
            }
        }
        if self.max_drop.is_nan() || self.max_drop < 0.0 {
            return Err(Error::Range(format!("max_drop must be >= 0, got {}", self.max_drop)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Every available candidate exceeded the allowed drop.
    DropExceeded,
    /// Both schedules reached their last entry.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchStep {
    pub step: usize,
    /// Network index of the layer compressed further; `None` for the start.
    pub stepped: Option<usize>,
    pub rank_a: usize,
    pub rank_b: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchTrace {
    pub layer_a: usize,
    pub layer_b: usize,
    pub baseline_accuracy: f64,
    pub steps: Vec<SearchStep>,
    pub final_rank_a: usize,
    pub final_rank_b: usize,
    pub final_accuracy: f64,
    /// Remaining weight fraction of each layer and of both together.
    pub fraction_a: f64,
    pub fraction_b: f64,
    pub fraction_total: f64,
    pub stop_reason: StopReason,
}

impl SearchTrace {
    pub fn steps_taken(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

/// Builds networks with both layers compressed to given ranks, always
/// starting from the original weights.
pub struct JointCompressor<'a, T> {
    net: &'a Network<T>,
    layer_a: usize,
    layer_b: usize,
    acts_a: &'a ActivationBatch<T>,
    acts_b: &'a ActivationBatch<T>,
    cfg: &'a SearchConfig<T>,
    cache: RefCell<HashMap<(usize, usize), FactorPair<T>>>,
}

impl<'a, T: Scalar> JointCompressor<'a, T> {
    pub fn new(
        net: &'a Network<T>,
        layer_a: usize,
        layer_b: usize,
        train_acts: (&'a ActivationBatch<T>, &'a ActivationBatch<T>),
        cfg: &'a SearchConfig<T>,
    ) -> Result<Self> {
        cfg.validate()?;
        if layer_a == layer_b {
            return Err(Error::Range("joint search needs two distinct layers".into()));
        }
        for (idx, acts, sched) in [
            (layer_a, train_acts.0, &cfg.schedule_a),
            (layer_b, train_acts.1, &cfg.schedule_b),
        ] {
            let layer = net.layer(idx)?;
            if acts.dims() != layer.inputs() {
                return Err(Error::dim(
                    "joint search activations",
                    layer.weights().shape(),
                    acts.x().shape(),
                ));
            }
            if sched[0] > layer.max_rank() {
                return Err(Error::Rank {
                    rank: sched[0],
                    max: layer.max_rank(),
                });
            }
        }
        if let Some(x) = &cfg.reextract_from {
            if x.rows() != net.input_dim() {
                return Err(Error::dim("reextract inputs", (net.input_dim(), 0), x.shape()));
            }
        }
        Ok(Self {
            net,
            layer_a,
            layer_b,
            acts_a: train_acts.0,
            acts_b: train_acts.1,
            cfg,
            cache: RefCell::new(HashMap::new()),
        })
    }

    fn compress(&self, index: usize, rank: usize, acts: &ActivationBatch<T>) -> Result<FactorPair<T>> {
        let layer = self.net.layer(index)?;
        match self.cfg.method {
            Method::Svd => svd_truncate(layer, rank),
            Method::SvdBc => bias_compensate(layer, &svd_truncate(layer, rank)?, acts),
            Method::Dalr => dalr_compress(layer, acts, rank, self.cfg.ridge),
        }
    }

    fn cached(&self, index: usize, rank: usize, acts: &ActivationBatch<T>) -> Result<FactorPair<T>> {
        if let Some(p) = self.cache.borrow().get(&(index, rank)) {
            return Ok(p.clone());
        }
        let pair = self.compress(index, rank, acts)?;
        self.cache.borrow_mut().insert((index, rank), pair.clone());
        Ok(pair)
    }

    fn is_compressed(&self, index: usize, rank: usize) -> bool {
        rank < self.net.layers()[index].max_rank()
    }

    /// The original network with layer A at `rank_a` and layer B at `rank_b`.
    /// Ranks at or above a layer's full rank leave that layer untouched.
    pub fn network_at(&self, rank_a: usize, rank_b: usize) -> Result<Network<T>> {
        let (up, up_rank, up_acts, down, down_rank, down_acts) = if self.layer_a < self.layer_b {
            (self.layer_a, rank_a, self.acts_a, self.layer_b, rank_b, self.acts_b)
        } else {
            (self.layer_b, rank_b, self.acts_b, self.layer_a, rank_a, self.acts_a)
        };

        let mut net = self.net.clone();
        let mut shift = 0;
        if self.is_compressed(up, up_rank) {
            net = net.splice(up, &self.cached(up, up_rank, up_acts)?)?;
            shift = 1;
        }
        if self.is_compressed(down, down_rank) {
            let pair = match &self.cfg.reextract_from {
                Some(x) if shift == 1 => {
                    let fresh = net.extract_activations(x, down + shift)?;
                    self.compress(down, down_rank, &fresh)?
                }
                _ => self.cached(down, down_rank, down_acts)?,
            };
            net = net.splice(down + shift, &pair)?;
        }
        Ok(net)
    }

    fn weight_fraction(&self, index: usize, rank: usize) -> Result<f64> {
        let layer = &self.net.layers()[index];
        if !self.is_compressed(index, rank) {
            return Ok(1.0);
        }
        parameter_fraction(layer.outputs(), layer.inputs(), rank)
    }
}

/// Runs the greedy joint search. `train_acts` are the inputs of `layer_a` and
/// `layer_b` respectively, extracted once from the original network.
pub fn joint_rank_search<T: Scalar>(
    net: &Network<T>,
    layer_a: usize,
    layer_b: usize,
    val: &LabeledBatch<T>,
    train_acts: (&ActivationBatch<T>, &ActivationBatch<T>),
    cfg: &SearchConfig<T>,
) -> Result<SearchTrace> {
    let jc = JointCompressor::new(net, layer_a, layer_b, train_acts, cfg)?;
    let baseline = net.accuracy(val)?;

    let (sa, sb) = (&cfg.schedule_a, &cfg.schedule_b);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut accuracy = jc.network_at(sa[0], sb[0])?.accuracy(val)?;
    let mut steps = vec![SearchStep {
        step: 0,
        stepped: None,
        rank_a: sa[0],
        rank_b: sb[0],
        accuracy,
    }];

    let stop_reason = loop {
        let cand_a = if ia + 1 < sa.len() {
            Some(jc.network_at(sa[ia + 1], sb[ib])?.accuracy(val)?)
        } else {
            None
        };
        let cand_b = if ib + 1 < sb.len() {
            Some(jc.network_at(sa[ia], sb[ib + 1])?.accuracy(val)?)
        } else {
            None
        };
        if cand_a.is_none() && cand_b.is_none() {
            break StopReason::Exhausted;
        }
        let reference = match cfg.stop_rule {
            StopRule::Baseline => baseline,
            StopRule::Previous => accuracy,
        };
        let within = |acc: Option<f64>| acc.filter(|&a| reference - a <= cfg.max_drop);
        let choice = match (within(cand_a), within(cand_b)) {
            (None, None) => break StopReason::DropExceeded,
            (Some(a), None) => (true, a),
            (None, Some(b)) => (false, b),
            (Some(a), Some(b)) => {
                if a >= b {
                    (true, a)
                } else {
                    (false, b)
                }
            }
        };
        let stepped = if choice.0 {
            ia += 1;
            layer_a
        } else {
            ib += 1;
            layer_b
        };
        accuracy = choice.1;
        steps.push(SearchStep {
            step: steps.len(),
            stepped: Some(stepped),
            rank_a: sa[ia],
            rank_b: sb[ib],
            accuracy,
        });
    };

    let (ra, rb) = (sa[ia], sb[ib]);
    let fraction_a = jc.weight_fraction(layer_a, ra)?;
    let fraction_b = jc.weight_fraction(layer_b, rb)?;
    let size = |i: usize| {
        let l = &net.layers()[i];
        (l.outputs() * l.inputs()) as f64
    };
    let fraction_total = (fraction_a * size(layer_a) + fraction_b * size(layer_b)) / (size(layer_a) + size(layer_b));
    Ok(SearchTrace {
        layer_a,
        layer_b,
        baseline_accuracy: baseline,
        steps,
        final_rank_a: ra,
        final_rank_b: rb,
        final_accuracy: accuracy,
        fraction_a,
        fraction_b,
        fraction_total,
        stop_reason,
    })
}
