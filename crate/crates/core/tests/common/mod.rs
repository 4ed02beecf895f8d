//! Test-only helpers: seeded data, independent oracles and a tiny trainer.
//!
//! Nothing here calls into the library's decompositions or solvers; the
//! oracles work on plain `Vec<Vec<f64>>` so they stay independent of the code
//! they check.

#![allow(dead_code)]
// the oracles index like the formulas they spell out
#![allow(clippy::needless_range_loop)]

pub mod formats;
pub mod oracle;
pub mod search_case;
pub mod train;

use dalr::{DenseMatrix, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// Non-negative inputs resembling post-ReLU activations.
pub fn relu_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, shift: f64) -> Matrix {
    gaussian(rng, rows, cols).map(|v| (v + shift).max(0.0))
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
    DenseMatrix::from_rows(rows).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
