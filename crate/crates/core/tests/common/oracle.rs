//! Brute-force reference computations.

use dalr::Matrix;

use super::{from_rows, to_rows};

/// Triple-loop product, accumulating over the inner index in order.
pub fn naive_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, k, n) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; n]; m];
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for t in 0..k {
                acc += a[i][t] * b[t][j];
            }
            c[i][j] = acc;
        }
    }
    c
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Elementwise Frobenius norm in row-major order.
pub fn naive_frobenius(a: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for row in a {
        for &v in row {
            acc += v * v;
        }
    }
    acc.sqrt()
}

/// Eigenvalues of a symmetric matrix by classical (largest off-diagonal)
/// Jacobi rotations, sorted descending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    for _ in 0..(200 * n * n).max(100) {
        let (mut p, mut q, mut big) = (0, 1, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                if m[i][j].abs() > big {
                    big = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        let diag_scale: f64 = (0..n).map(|i| m[i][i].abs()).fold(0.0, f64::max);
        if big <= 1e-300 || big <= 1e-18 * diag_scale {
            break;
        }
        let theta = 0.5 * (2.0 * m[p][q]).atan2(m[q][q] - m[p][p]);
        let (s, c) = theta.sin_cos();
        for k in 0..n {
            let mkp = m[k][p];
            let mkq = m[k][q];
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
        }
        for k in 0..n {
            let mpk = m[p][k];
            let mqk = m[q][k];
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

/// Squared singular values of `a` from the eigenvalues of the smaller Gram
/// matrix, descending, clamped at zero.
pub fn squared_singular_values(a: &Matrix) -> Vec<f64> {
    let rows = to_rows(a);
    let g = if a.rows() <= a.cols() {
        naive_matmul(&rows, &transpose(&rows))
    } else {
        naive_matmul(&transpose(&rows), &rows)
    };
    symmetric_eigenvalues(&g).into_iter().map(|v| v.max(0.0)).collect()
}

/// Gaussian elimination with partial pivoting; solves `a x = b` column-wise.
pub fn gauss_solve(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let k = b[0].len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb).copied().collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().partial_cmp(&aug[j][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, piv);
        let d = aug[col][col];
        assert!(d.abs() > 1e-300, "oracle hit a singular system");
        for r in 0..n {
            if r != col {
                let f = aug[r][col] / d;
                if f != 0.0 {
                    for c in col..n + k {
                        aug[r][c] -= f * aug[col][c];
                    }
                }
            }
        }
    }
    (0..n)
        .map(|i| (0..k).map(|c| aug[i][n + c] / aug[i][i]).collect())
        .collect()
}

/// Best objective `||Z - A B^T X||_F^2` reached by alternating least squares
/// over several random starts.
pub fn als_best_objective(z: &Matrix, x: &Matrix, k: usize, iters: usize, restarts: usize, seed: u64) -> f64 {
    let zr = to_rows(z);
    let xr = to_rows(x);
    let (m, n) = (z.rows(), x.rows());
    let xxt = naive_matmul(&xr, &transpose(&xr));
    let zxt = naive_matmul(&zr, &transpose(&xr));
    let mut best = f64::INFINITY;
    let mut rng = super::rng(seed);
    for _ in 0..restarts {
        let mut b = to_rows(&super::gaussian(&mut rng, n, k));
        let mut a = vec![vec![0.0; k]; m];
        for _ in 0..iters {
            // A = Z (B^T X)^T [(B^T X)(B^T X)^T]^{-1}
            let btx = naive_matmul(&transpose(&b), &xr);
            let g = naive_matmul(&btx, &transpose(&btx));
            let rhs = naive_matmul(&btx, &transpose(&zr));
            a = transpose(&gauss_solve(&regularize(&g), &rhs));
            // B^T = (A^T A)^{-1} A^T Z X^T (X X^T)^{-1}
            let ata = naive_matmul(&transpose(&a), &a);
            let atzxt = naive_matmul(&transpose(&a), &zxt);
            let left = gauss_solve(&regularize(&ata), &atzxt);
            b = gauss_solve(&xxt, &transpose(&left));
        }
        let c = naive_matmul(&a, &transpose(&b));
        let cx = naive_matmul(&c, &xr);
        let mut obj = 0.0;
        for i in 0..m {
            for j in 0..x.cols() {
                let d = zr[i][j] - cx[i][j];
                obj += d * d;
            }
        }
        best = best.min(obj);
    }
    best
}

fn regularize(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let scale: f64 = (0..g.len()).map(|i| g[i][i]).fold(0.0, f64::max);
    let mut out = g.to_vec();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += 1e-14 * scale.max(1e-300);
    }
    out
}

pub fn naive_product(a: &Matrix, b: &Matrix) -> Matrix {
    from_rows(&naive_matmul(&to_rows(a), &to_rows(b)))
}
