//! Full-batch gradient descent on softmax cross-entropy for small ReLU MLPs.
//!
//! This is the fine-tuning fixture used by the domain-transfer tests; the
//! library itself has no training loop.

use dalr::{DenseMatrix, LinearLayer, Matrix, Net, Network};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub struct Mlp {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// He-initialized layers for the given widths.
    pub fn init(rng: &mut ChaCha8Rng, widths: &[usize]) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in widths.windows(2) {
            weights.push(init_layer(rng, w[1], w[0]));
            biases.push(vec![0.0; w[1]]);
        }
        Self { weights, biases }
    }

    pub fn reinit_layer(&mut self, rng: &mut ChaCha8Rng, index: usize) {
        let (m, n) = self.weights[index].shape();
        self.weights[index] = init_layer(rng, m, n);
        self.biases[index] = vec![0.0; m];
    }

    pub fn to_network(&self) -> Net {
        let layers = self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| LinearLayer::new(w.clone(), b.clone()).unwrap())
            .collect();
        Network::mlp(layers).unwrap()
    }

    /// Momentum gradient descent; only layers flagged in `trainable` move.
    pub fn train(&mut self, x: &Matrix, labels: &[usize], trainable: &[bool], epochs: usize, lr: f64) {
        let depth = self.weights.len();
        let p = x.cols() as f64;
        let mut vel_w: Vec<Matrix> = self
            .weights
            .iter()
            .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
            .collect();
        let mut vel_b: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        for _ in 0..epochs {
            // forward, keeping pre-activations and layer inputs
            let mut inputs = vec![x.clone()];
            let mut pre = Vec::with_capacity(depth);
            for l in 0..depth {
                let z = self.weights[l]
                    .matmul(&inputs[l])
                    .unwrap()
                    .add_column_broadcast(&self.biases[l])
                    .unwrap();
                if l + 1 < depth {
                    inputs.push(z.map(|v| v.max(0.0)));
                }
                pre.push(z);
            }
            let mut delta = softmax_grad(&pre[depth - 1], labels, p);
            for l in (0..depth).rev() {
                let grad_in = if l > 0 {
                    let back = self.weights[l].t_matmul(&delta).unwrap();
                    Some(DenseMatrix::from_fn(back.rows(), back.cols(), |i, j| {
                        if pre[l - 1][(i, j)] > 0.0 {
                            back[(i, j)]
                        } else {
                            0.0
                        }
                    }))
                } else {
                    None
                };
                if trainable[l] {
                    let gw = delta.matmul_t(&inputs[l]).unwrap();
                    let gb: Vec<f64> = (0..delta.rows()).map(|i| delta.row(i).iter().sum()).collect();
                    vel_w[l] = vel_w[l].scale(0.9).sub(&gw.scale(lr)).unwrap();
                    self.weights[l] = self.weights[l].add(&vel_w[l]).unwrap();
                    for ((v, b), g) in vel_b[l].iter_mut().zip(self.biases[l].iter_mut()).zip(&gb) {
                        *v = 0.9 * *v - lr * g;
                        *b += *v;
                    }
                }
                if let Some(g) = grad_in {
                    delta = g;
                }
            }
        }
    }
}

fn init_layer(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    let scale = (2.0 / n as f64).sqrt();
    DenseMatrix::from_fn(m, n, |_, _| {
        let g: f64 = StandardNormal.sample(rng);
        g * scale
    })
}

/// d(mean cross-entropy)/d(logits).
fn softmax_grad(logits: &Matrix, labels: &[usize], p: f64) -> Matrix {
    let (c, n) = logits.shape();
    let mut out = DenseMatrix::zeros(c, n);
    for j in 0..n {
        let max = (0..c).map(|i| logits[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = (0..c).map(|i| (logits[(i, j)] - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        for i in 0..c {
            let target = if i == labels[j] { 1.0 } else { 0.0 };
            out[(i, j)] = (exps[i] / total - target) / p;
        }
    }
    out
}

/// Gaussian class clusters in the non-negative orthant. Dimensions listed
/// in `dead` are zero in every sample.
pub struct Task {
    pub prototypes: Vec<Vec<f64>>,
    pub noise: f64,
    pub dead: Vec<usize>,
}

impl Task {
    pub fn new(rng: &mut ChaCha8Rng, classes: usize, dims: usize, noise: f64, dead: Vec<usize>) -> Self {
        let prototypes = (0..classes)
            .map(|_| (0..dims).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        Self {
            prototypes,
            noise,
            dead,
        }
    }

    /// `per_class` samples of every class, interleaved.
    pub fn sample(&self, rng: &mut ChaCha8Rng, per_class: usize) -> (Matrix, Vec<usize>) {
        let classes = self.prototypes.len();
        let dims = self.prototypes[0].len();
        let total = classes * per_class;
        let labels: Vec<usize> = (0..total).map(|j| j % classes).collect();
        let mut x = DenseMatrix::zeros(dims, total);
        for (j, &c) in labels.iter().enumerate() {
            for i in 0..dims {
                let g: f64 = StandardNormal.sample(rng);
                x[(i, j)] = (self.prototypes[c][i] + self.noise * g).max(0.0);
            }
            for &d in &self.dead {
                x[(d, j)] = 0.0;
            }
        }
        (x, labels)
    }
}
