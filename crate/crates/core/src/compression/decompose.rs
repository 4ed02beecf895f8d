//! Truncated SVD, bias compensation and the activation-aware (DALR)
//! factorization.

use crate::compression::types::{ActivationBatch, FactorPair, LinearLayer, Method, RidgeConfig};
use crate::error::{Error, Result};
use crate::linalg::{solve_spd, svd};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// How the input response vector in bias compensation is reduced over samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiasReduction {
    /// Per-dimension mean: the least-squares optimal bias.
    #[default]
    Mean,
    /// Per-dimension sum, `X 1_p` taken literally. Compatibility only.
    Sum,
}

/// Keeps the `k` leading singular triplets of `W`: `a = U_k`, `b = V_k S_k`.
/// The bias is carried over unchanged.
pub fn svd_truncate<T: Scalar>(layer: &LinearLayer<T>, k: usize) -> Result<FactorPair<T>> {
    layer.check_rank(k)?;
    let f = svd(layer.weights())?.truncate(k)?;
    let n = layer.inputs();
    let b = DenseMatrix::from_fn(n, k, |i, j| f.vt[(j, i)] * f.s[j]);
    FactorPair::new(f.u, b, layer.bias().to_vec(), Method::Svd, T::zero())
}

/// Replaces the bias with `b + (W - a b^T) x_mean`, cancelling the mean output
/// shift the approximation causes on non-centred inputs.
///
/// An SVD pair comes back tagged [`Method::SvdBc`]; other methods keep their
/// tag.
pub fn bias_compensate<T: Scalar>(
    layer: &LinearLayer<T>,
    pair: &FactorPair<T>,
    acts: &ActivationBatch<T>,
) -> Result<FactorPair<T>> {
    bias_compensate_with(layer, pair, acts, BiasReduction::Mean)
}

pub fn bias_compensate_with<T: Scalar>(
    layer: &LinearLayer<T>,
    pair: &FactorPair<T>,
    acts: &ActivationBatch<T>,
    reduction: BiasReduction,
) -> Result<FactorPair<T>> {
    check_pair(layer, pair)?;
    if acts.dims() != layer.inputs() {
        return Err(Error::dim("bias_compensate", layer.weights().shape(), acts.x().shape()));
    }
    let response = match reduction {
        BiasReduction::Mean => acts.mean().to_vec(),
        BiasReduction::Sum => acts.sums(),
    };
    compensate_with_vector(layer, pair, &response)
}

/// Bias compensation from an explicit mean input vector (streaming callers).
pub fn compensate_with_vector<T: Scalar>(
    layer: &LinearLayer<T>,
    pair: &FactorPair<T>,
    mean_input: &[T],
) -> Result<FactorPair<T>> {
    check_pair(layer, pair)?;
    let residual = layer.weights().sub(&pair.product())?;
    let shift = residual.mul_vec(mean_input)?;
    let new_bias: Vec<T> = layer.bias().iter().zip(&shift).map(|(&b, &d)| b + d).collect();
    if new_bias.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("bias_compensate"));
    }
    let method = match pair.method {
        Method::Svd => Method::SvdBc,
        m => m,
    };
    FactorPair::new(pair.a.clone(), pair.b.clone(), new_bias, method, pair.lambda)
}

fn check_pair<T: Scalar>(layer: &LinearLayer<T>, pair: &FactorPair<T>) -> Result<()> {
    if pair.outputs() != layer.outputs() || pair.inputs() != layer.inputs() {
        return Err(Error::dim(
            "factor pair vs layer",
            (pair.outputs(), pair.inputs()),
            layer.weights().shape(),
        ));
    }
    Ok(())
}

/// Second-moment statistics of a batch, accumulable over column blocks:
/// `X X^T`, `X 1_p` and `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramStats<T> {
    gram: DenseMatrix<T>,
    sums: Vec<T>,
    samples: usize,
}

impl<T: Scalar> GramStats<T> {
    pub fn new(dims: usize) -> Self {
        Self {
            gram: DenseMatrix::zeros(dims, dims),
            sums: vec![T::zero(); dims],
            samples: 0,
        }
    }

    pub fn from_batch(acts: &ActivationBatch<T>) -> Self {
        let mut s = Self::new(acts.dims());
        s.accumulate(acts.x()).expect("dims match by construction");
        s
    }

    /// Adds a block of columns (`n x q`).
    pub fn accumulate(&mut self, block: &DenseMatrix<T>) -> Result<()> {
        let n = self.sums.len();
        if block.rows() != n {
            return Err(Error::dim("GramStats::accumulate", (n, n), block.shape()));
        }
        let g = block.gram();
        self.gram = self.gram.add(&g)?;
        for (s, i) in self.sums.iter_mut().zip(0..n) {
            *s = block.row(i).iter().fold(*s, |a, &v| a + v);
        }
        self.samples += block.cols();
        Ok(())
    }

    pub fn gram(&self) -> &DenseMatrix<T> {
        &self.gram
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn dims(&self) -> usize {
        self.sums.len()
    }

    pub fn mean(&self) -> Result<Vec<T>> {
        if self.samples == 0 {
            return Err(Error::EmptyBatch);
        }
        let p = T::from_count(self.samples);
        Ok(self.sums.iter().map(|&s| s / p).collect())
    }
}

/// Rank-`k` factorization minimizing `||W X - A B^T X||_F^2 + lambda ||A B^T||_F^2`.
///
/// `A` holds the `k` leading left singular vectors of `Z = W X` and
/// `B = (X X^T + lambda I)^{-1} X Z^T A`. The original bias is kept.
pub fn dalr_compress<T: Scalar>(
    layer: &LinearLayer<T>,
    acts: &ActivationBatch<T>,
    k: usize,
    ridge: RidgeConfig<T>,
) -> Result<FactorPair<T>> {
    layer.check_rank(k)?;
    if acts.dims() != layer.inputs() {
        return Err(Error::dim("dalr_compress", layer.weights().shape(), acts.x().shape()));
    }
    let mut z = layer.weights().matmul(acts.x())?;
    if z.cols() < k {
        // zero columns leave the left singular subspace unchanged
        z = DenseMatrix::from_fn(z.rows(), k, |i, j| if j < z.cols() { z[(i, j)] } else { T::zero() });
    }
    let u = svd(&z)?.u.leading_columns(k);
    let gram = acts.x().gram();
    finish_dalr(layer, u, &gram, ridge)
}

/// DALR from accumulated statistics only. The left factor comes from the
/// eigenvectors of `Z Z^T = W (X X^T) W^T`, so `X` never has to be resident.
pub fn dalr_compress_gram<T: Scalar>(
    layer: &LinearLayer<T>,
    stats: &GramStats<T>,
    k: usize,
    ridge: RidgeConfig<T>,
) -> Result<FactorPair<T>> {
    layer.check_rank(k)?;
    if stats.dims() != layer.inputs() {
        return Err(Error::dim(
            "dalr_compress_gram",
            layer.weights().shape(),
            stats.gram().shape(),
        ));
    }
    if stats.samples() == 0 {
        return Err(Error::EmptyBatch);
    }
    let w = layer.weights();
    let zzt = w.matmul(stats.gram())?.matmul_t(w)?;
    let u = svd(&zzt)?.u.leading_columns(k);
    finish_dalr(layer, u, stats.gram(), ridge)
}

fn finish_dalr<T: Scalar>(
    layer: &LinearLayer<T>,
    u: DenseMatrix<T>,
    gram: &DenseMatrix<T>,
    ridge: RidgeConfig<T>,
) -> Result<FactorPair<T>> {
    let lambda = ridge.resolve(gram);
    // X Z^T U = (X X^T) W^T U
    let rhs = gram.matmul(&layer.weights().t_matmul(&u)?)?;
    let system = gram.add_scaled_identity(lambda)?;
    let b = solve_spd(&system, &rhs)?;
    FactorPair::new(u, b, layer.bias().to_vec(), Method::Dalr, lambda)
}

/// Both sides of the ridge-augmentation identity:
/// `(||Z - C X||^2 + lambda ||C||^2, ||Z* - C X*||^2)` with
/// `X* = [X, sqrt(lambda) I]` and `Z* = [Z, 0]`.
pub fn ridge_augmentation_check<T: Scalar>(
    z: &DenseMatrix<T>,
    x: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    lambda: T,
) -> Result<(T, T)> {
    if lambda < T::zero() {
        return Err(Error::Range(format!("lambda must be non-negative, got {lambda}")));
    }
    let cx = c.matmul(x)?;
    let penalized = z.sub(&cx)?.frobenius_norm_sq() + lambda * c.frobenius_norm_sq();

    let (n, p) = x.shape();
    let root = lambda.sqrt();
    let x_aug = DenseMatrix::from_fn(n, p + n, |i, j| {
        if j < p {
            x[(i, j)]
        } else if j - p == i {
            root
        } else {
            T::zero()
        }
    });
    let z_aug = DenseMatrix::from_fn(z.rows(), p + n, |i, j| if j < p { z[(i, j)] } else { T::zero() });
    let augmented = z_aug.sub(&c.matmul(&x_aug)?)?.frobenius_norm_sq();
    Ok((penalized, augmented))
}
