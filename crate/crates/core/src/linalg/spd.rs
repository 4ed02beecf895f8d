use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

const SYMMETRY_TOL: f64 = 1e-10;

/// Solves `m * s = rhs` for symmetric positive definite `m` via an LDL^T
/// factorization.
///
/// A pivot at or below `n * eps * max(diag)` is reported as
/// [`Error::Singular`]; for ridge systems that means lambda is too small.
pub fn solve_spd<T: Scalar>(m: &DenseMatrix<T>, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::dim("solve_spd", m.shape(), rhs.shape()));
    }
    if rhs.rows() != n {
        return Err(Error::dim("solve_spd", m.shape(), rhs.shape()));
    }
    if !m.is_finite() || !rhs.is_finite() {
        return Err(Error::NonFinite("solve_spd input"));
    }
    let scale = m.as_slice().iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    for i in 0..n {
        for j in 0..i {
            let diff = (m[(i, j)] - m[(j, i)]).abs();
            if diff > T::lit(SYMMETRY_TOL) * scale {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    diff: diff.as_f64(),
                });
            }
        }
    }

    let (l, d) = ldlt(m)?;

    let mut out = rhs.clone();
    for c in 0..rhs.cols() {
        // L y = b
        for i in 0..n {
            let mut acc = out[(i, c)];
            for j in 0..i {
                acc = acc - l[(i, j)] * out[(j, c)];
            }
            out[(i, c)] = acc;
        }
        for i in 0..n {
            out[(i, c)] = out[(i, c)] / d[i];
        }
        // L^T x = z
        for i in (0..n).rev() {
            let mut acc = out[(i, c)];
            for j in i + 1..n {
                acc = acc - l[(j, i)] * out[(j, c)];
            }
            out[(i, c)] = acc;
        }
    }
    out.ensure_finite("solve_spd")
}

/// Square-root-free Cholesky: unit lower-triangular `l` and positive `d` with
/// `m = l * diag(d) * l^T`.
pub fn ldlt<T: Scalar>(m: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, Vec<T>)> {
    let n = m.rows();
    let max_diag = (0..n).fold(T::zero(), |acc, i| acc.max(m[(i, i)]));
    let floor = T::from_count(n.max(1)) * T::epsilon() * max_diag;
    let mut l = DenseMatrix::identity(n);
    let mut d = vec![T::zero(); n];
    for j in 0..n {
        let mut dj = m[(j, j)];
        for k in 0..j {
            dj = dj - l[(j, k)] * l[(j, k)] * d[k];
        }
        if dj.is_nan() || dj <= floor || dj <= T::zero() {
            return Err(Error::Singular {
                row: j,
                pivot: dj.as_f64(),
            });
        }
        d[j] = dj;
        for i in j + 1..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc = acc - l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = acc / dj;
        }
    }
    Ok((l, d))
}
