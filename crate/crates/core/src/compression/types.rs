use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// Fully connected layer `y = W x + b` with `W: m x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLayer<T> {
    weights: DenseMatrix<T>,
    bias: Vec<T>,
}

impl<T: Scalar> LinearLayer<T> {
    pub fn new(weights: DenseMatrix<T>, bias: Vec<T>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::dim("LinearLayer::new", weights.shape(), (bias.len(), 1)));
        }
        if !weights.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("LinearLayer::new"));
        }
        Ok(Self { weights, bias })
    }

    /// Layer with zero bias.
    pub fn unbiased(weights: DenseMatrix<T>) -> Self {
        let m = weights.rows();
        Self {
            weights,
            bias: vec![T::zero(); m],
        }
    }

    pub fn weights(&self) -> &DenseMatrix<T> {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    /// Output dimension `m`.
    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    /// Input dimension `n`.
    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn max_rank(&self) -> usize {
        self.outputs().min(self.inputs())
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.bias.len()
    }

    /// `W X + b 1^T` for a batch of column inputs.
    pub fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.weights.matmul(x)?.add_column_broadcast(&self.bias)
    }

    pub(crate) fn check_rank(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.max_rank() {
            return Err(Error::Rank {
                rank: k,
                max: self.max_rank(),
            });
        }
        Ok(())
    }
}

/// Layer inputs stored as columns (`n x p`), with the per-dimension mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationBatch<T> {
    x: DenseMatrix<T>,
    mean: Vec<T>,
    post_relu: bool,
}

impl<T: Scalar> ActivationBatch<T> {
    pub fn new(x: DenseMatrix<T>) -> Result<Self> {
        if x.cols() == 0 {
            return Err(Error::EmptyBatch);
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("ActivationBatch::new"));
        }
        let mean = x.row_means();
        Ok(Self {
            x,
            mean,
            post_relu: false,
        })
    }

    /// Batch taken right after a ReLU; every entry must be non-negative.
    pub fn post_relu(x: DenseMatrix<T>) -> Result<Self> {
        if let Some(pos) = x.as_slice().iter().position(|&v| v < T::zero()) {
            return Err(Error::Range(format!(
                "post-ReLU batch has a negative entry at ({}, {})",
                pos / x.cols().max(1),
                pos % x.cols().max(1)
            )));
        }
        let mut batch = Self::new(x)?;
        batch.post_relu = true;
        Ok(batch)
    }

    pub fn x(&self) -> &DenseMatrix<T> {
        &self.x
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn is_post_relu(&self) -> bool {
        self.post_relu
    }

    /// Input dimension `n`.
    pub fn dims(&self) -> usize {
        self.x.rows()
    }

    /// Sample count `p`.
    pub fn samples(&self) -> usize {
        self.x.cols()
    }

    /// Per-dimension column sums, `X 1_p`.
    pub fn sums(&self) -> Vec<T> {
        (0..self.x.rows())
            .map(|i| self.x.row(i).iter().fold(T::zero(), |a, &v| a + v))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Svd,
    SvdBc,
    Dalr,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Svd => "svd",
            Method::SvdBc => "svd-bc",
            Method::Dalr => "dalr",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rank-`k` replacement for a layer: `W ~ a * b^T`, bias `new_bias`.
///
/// As two layers: first `b^T` (k x n, zero bias), then `a` (m x k) with
/// `new_bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub new_bias: Vec<T>,
    pub method: Method,
    pub lambda: T,
}

impl<T: Scalar> FactorPair<T> {
    pub fn new(a: DenseMatrix<T>, b: DenseMatrix<T>, new_bias: Vec<T>, method: Method, lambda: T) -> Result<Self> {
        if a.cols() != b.cols() || a.cols() == 0 {
            return Err(Error::dim("FactorPair::new", a.shape(), b.shape()));
        }
        if new_bias.len() != a.rows() {
            return Err(Error::dim("FactorPair::new", a.shape(), (new_bias.len(), 1)));
        }
        if a.cols() > a.rows().min(b.rows()) {
            return Err(Error::Rank {
                rank: a.cols(),
                max: a.rows().min(b.rows()),
            });
        }
        if lambda < T::zero() {
            return Err(Error::Range(format!("lambda must be non-negative, got {lambda}")));
        }
        Ok(Self {
            a,
            b,
            new_bias,
            method,
            lambda,
        })
    }

    pub fn rank(&self) -> usize {
        self.a.cols()
    }

    pub fn outputs(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.rows()
    }

    /// The implied `m x n` weight matrix `a * b^T`.
    pub fn product(&self) -> DenseMatrix<T> {
        self.a.matmul_t(&self.b).expect("factor shapes are consistent")
    }

    /// Weight parameters of the two replacement layers, `(m + n) k`.
    pub fn weight_count(&self) -> usize {
        (self.outputs() + self.inputs()) * self.rank()
    }

    /// `(m + n) k < m n`: whether the factorization actually saves parameters.
    pub fn saves_parameters(&self) -> bool {
        self.weight_count() < self.outputs() * self.inputs()
    }

    /// `a (b^T x) + new_bias` for column inputs.
    pub fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let hidden = self.b.t_matmul(x)?;
        self.a.matmul(&hidden)?.add_column_broadcast(&self.new_bias)
    }

    /// The single equivalent layer `(a b^T, new_bias)`.
    pub fn to_layer(&self) -> LinearLayer<T> {
        LinearLayer::new(self.product(), self.new_bias.clone()).expect("factor pair yields a valid layer")
    }
}

/// Ridge penalty for the DALR regression.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RidgeConfig<T> {
    /// `1e-3 * trace(X X^T) / n`, tracking the input scale.
    #[default]
    Auto,
    Fixed(T),
}

impl<T: Scalar> RidgeConfig<T> {
    pub fn fixed(lambda: T) -> Result<Self> {
        if !lambda.is_finite() || lambda < T::zero() {
            return Err(Error::Range(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        Ok(RidgeConfig::Fixed(lambda))
    }

    /// Resolves the penalty against the Gram matrix `X X^T`.
    pub fn resolve(&self, gram: &DenseMatrix<T>) -> T {
        match *self {
            RidgeConfig::Fixed(l) => l,
            RidgeConfig::Auto => {
                let n = gram.rows();
                if n == 0 {
                    return T::zero();
                }
                let trace = (0..n).fold(T::zero(), |acc, i| acc + gram[(i, i)]);
                T::lit(1e-3) * trace / T::from_count(n)
            }
        }
    }
}
