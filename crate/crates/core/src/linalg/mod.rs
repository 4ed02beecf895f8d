//! Decompositions and solvers.

mod spd;
mod svd;

pub use spd::{ldlt, solve_spd};
pub use svd::{svd, svd_truncated, SvdFactors};
