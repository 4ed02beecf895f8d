//! Low-rank compression of fully connected layers that takes the target
//! domain's activation statistics into account.
//!
//! Three decompositions replace an `m x n` layer with two thinner layers:
//! truncated SVD of the weights, truncated SVD with a bias that absorbs the
//! mean output shift, and DALR, which minimizes the output error
//! `||W X - A B^T X||_F` over the observed inputs `X` with a ridge penalty.
//! Activation-pruning baselines, activation-rate statistics and a greedy
//! two-layer rank search complete the toolkit.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix it to `f64`,
//! which is what the file formats and CLI use.

pub mod compression;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod network;
pub mod scalar;
pub mod search;
pub mod stats;

pub use compression::{
    bias_compensate, dalr_compress, parameter_fraction, prune_by_activation, reconstruction_error,
    ridge_augmentation_check, svd_truncate, ActivationBatch, FactorPair, LinearLayer, Method, PruneScore, RidgeConfig,
};
pub use error::{Error, ErrorKind, Result};
pub use linalg::{solve_spd, svd, SvdFactors};
pub use matrix::DenseMatrix;
pub use network::{Activation, LabeledBatch, Network};
pub use scalar::Scalar;
pub use search::{joint_rank_search, SearchConfig, SearchTrace};
pub use stats::{activation_rates, compare_profiles, ActivationProfile, SkewReport};

pub type Matrix = DenseMatrix<f64>;
pub type Matrix32 = DenseMatrix<f32>;
pub type Layer = LinearLayer<f64>;
pub type Activations = ActivationBatch<f64>;
pub type Factors = FactorPair<f64>;
pub type Net = Network<f64>;
pub type Batch = LabeledBatch<f64>;
pub type Profile = ActivationProfile<f64>;
