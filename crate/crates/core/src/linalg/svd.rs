//! Thin SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of the working matrix are rotated pairwise until mutually
//! orthogonal; their norms are the singular values and the accumulated
//! rotations form `V`. Accuracy is relative per singular value, which matters
//! for the small trailing values the compression tests inspect.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// `a = u * diag(s) * vt` with `r = min(m, n)` components.
///
/// `s` is non-increasing, `u` has orthonormal columns, `vt` orthonormal rows,
/// and the first entry of each left singular vector whose magnitude exceeds
/// machine epsilon is positive.
#[derive(Debug, Clone)]
pub struct SvdFactors<T> {
    pub u: DenseMatrix<T>,
    pub s: Vec<T>,
    pub vt: DenseMatrix<T>,
}

impl<T: Scalar> SvdFactors<T> {
    pub fn rank_capacity(&self) -> usize {
        self.s.len()
    }

    /// Keeps the leading `k` singular triplets.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.s.len() {
            return Err(Error::Rank {
                rank: k,
                max: self.s.len(),
            });
        }
        Ok(Self {
            u: self.u.leading_columns(k),
            s: self.s[..k].to_vec(),
            vt: self.vt.leading_rows(k),
        })
    }

    /// `u * diag(s) * vt`.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let us = DenseMatrix::from_fn(self.u.rows(), self.s.len(), |i, j| self.u[(i, j)] * self.s[j]);
        us.matmul(&self.vt).expect("factor shapes are consistent")
    }

    /// Number of singular values above `rel_tol * s[0]`.
    pub fn numerical_rank(&self, rel_tol: T) -> usize {
        match self.s.first() {
            Some(&s0) if s0 > T::zero() => self.s.iter().filter(|&&v| v > rel_tol * s0).count(),
            _ => 0,
        }
    }
}

/// Thin singular value decomposition.
pub fn svd<T: Scalar>(a: &DenseMatrix<T>) -> Result<SvdFactors<T>> {
    let (m, n) = a.shape();
    if a.is_empty() {
        return Err(Error::Shape(format!("cannot decompose an empty {m}x{n} matrix")));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    let mut f = if m >= n {
        let (u, s, v) = jacobi_tall(a, (m, n))?;
        SvdFactors {
            u,
            s,
            vt: v.transpose(),
        }
    } else {
        // a^T = U' S V'^T  =>  a = V' S U'^T
        let (u, s, v) = jacobi_tall(&a.transpose(), (m, n))?;
        SvdFactors {
            u: v,
            s,
            vt: u.transpose(),
        }
    };
    fix_signs(&mut f);
    Ok(f)
}

/// Rank-`k` truncated SVD.
pub fn svd_truncated<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<SvdFactors<T>> {
    svd(a)?.truncate(k)
}

/// One-sided Jacobi on a matrix with at least as many rows as columns.
/// Returns `(u, s, v)` with `u: m x n`, `v: n x n`, sorted descending.
fn jacobi_tall<T: Scalar>(
    a: &DenseMatrix<T>,
    orig_shape: (usize, usize),
) -> Result<(DenseMatrix<T>, Vec<T>, DenseMatrix<T>)> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let eps = T::epsilon();
    // a computed dot product carries rounding of order sqrt(m) * eps relative
    // to the column norms; a pair at that level can flip the sign of gamma on
    // every sweep without ever settling below plain eps
    let tol = eps * T::from_count(m).sqrt();
    // a column whose squared norm underflows is numerically zero; rotating
    // against it is a no-op, so it must not count as unconverged
    let floor = T::min_positive_value();

    let mut cols: Vec<Vec<T>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            e
        })
        .collect();

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == T::zero()
                    || alpha <= floor
                    || beta <= floor
                    || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt()
                {
                    continue;
                }
                let two = T::lit(2.0);
                let zeta = (beta - alpha) / (two * gamma);
                // hypot: zeta * zeta overflows when gamma is tiny against the norms
                let t = zeta.signum() / (zeta.abs() + T::one().hypot(zeta));
                if t == T::zero() {
                    // the angle underflows; the pair is as orthogonal as it can get
                    continue;
                }
                rotated = true;
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::Decomposition {
            rows: orig_shape.0,
            cols: orig_shape.1,
        });
    }

    let norms: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    if norms.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("svd"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal values keep the lower original index first
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));

    let s_max = norms[order[0]];
    let tiny = s_max * eps * T::from_count(m.max(1));
    let mut u_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let nrm = norms[j];
        if nrm > tiny && nrm > T::min_positive_value() {
            u_cols.push(cols[j].iter().map(|&x| x / nrm).collect());
        } else {
            u_cols.push(vec![T::zero(); m]);
            missing.push(slot);
        }
    }
    complete_orthonormal(&mut u_cols, &missing, m);

    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let u = DenseMatrix::from_fn(m, n, |i, j| u_cols[j][i]);
    let v = DenseMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    Ok((u, s, v))
}

#[inline]
fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Fills the columns listed in `missing` with unit vectors orthogonal to all
/// other columns. Each slot takes the standard basis vector with the largest
/// component outside the current span (lowest index on ties); one always has
/// squared residual at least `(m - filled) / m`.
fn complete_orthonormal<T: Scalar>(cols: &mut [Vec<T>], missing: &[usize], m: usize) {
    if missing.is_empty() {
        return;
    }
    let mut filled: Vec<bool> = vec![true; cols.len()];
    for &slot in missing {
        filled[slot] = false;
    }
    for &slot in missing {
        let mut best: Option<(T, Vec<T>)> = None;
        for candidate in 0..m {
            let mut e = vec![T::zero(); m];
            e[candidate] = T::one();
            // two Gram-Schmidt passes for numerical orthogonality
            for _ in 0..2 {
                for (k, c) in cols.iter().enumerate() {
                    if !filled[k] {
                        continue;
                    }
                    let proj = dot(c, &e);
                    for (ei, &ci) in e.iter_mut().zip(c) {
                        *ei = *ei - proj * ci;
                    }
                }
            }
            let nrm = dot(&e, &e).sqrt();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, e));
            }
        }
        let (nrm, e) = best.expect("m >= 1");
        assert!(
            nrm > T::zero(),
            "no basis vector left outside the span while completing U"
        );
        cols[slot] = e.into_iter().map(|x| x / nrm).collect();
        filled[slot] = true;
    }
}

fn fix_signs<T: Scalar>(f: &mut SvdFactors<T>) {
    let eps = T::epsilon();
    for j in 0..f.s.len() {
        let lead = (0..f.u.rows()).map(|i| f.u[(i, j)]).find(|x| x.abs() > eps);
        if matches!(lead, Some(x) if x < T::zero()) {
            for i in 0..f.u.rows() {
                f.u[(i, j)] = -f.u[(i, j)];
            }
            for x in f.vt.row_mut(j) {
                *x = -*x;
            }
        }
    }
}
