use crate::compression::types::{FactorPair, LinearLayer};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// Weight count of a rank-`k` factorization relative to the `m x n` original,
/// `(m + n) k / (m n)`.
pub fn parameter_fraction(m: usize, n: usize, k: usize) -> Result<f64> {
    if m == 0 || n == 0 || k == 0 {
        return Err(Error::Range(format!(
            "parameter_fraction needs positive m, n, k (got {m}, {n}, {k})"
        )));
    }
    Ok(((m + n) * k) as f64 / (m * n) as f64)
}

/// `||y_true - y_hat||_F`.
pub fn reconstruction_error<T: Scalar>(y_true: &DenseMatrix<T>, y_hat: &DenseMatrix<T>) -> Result<T> {
    Ok(y_true.sub(y_hat)?.frobenius_norm())
}

/// Output error of a factor pair against its source layer on column inputs `x`,
/// biases included.
pub fn layer_output_error<T: Scalar>(layer: &LinearLayer<T>, pair: &FactorPair<T>, x: &DenseMatrix<T>) -> Result<T> {
    reconstruction_error(&layer.apply(x)?, &pair.apply(x)?)
}
