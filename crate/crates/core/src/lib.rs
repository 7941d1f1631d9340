//! Bayesian Gaussian discriminant classifiers whose Wishart hyperparameters are
//! set by evidence maximization.
//!
//! Two model variants are provided. Variant A places a flat prior on the class
//! means; variant B uses an isotropic Gaussian mean prior with precision
//! γ₀ = d/‖X̂‖². Both integrate class means and precision matrices out
//! analytically, so only the per-class hyperparameters (p, k, r) are estimated,
//! by minimizing the negative log evidence.

pub mod datagen;
pub mod error;
pub mod evidence;
pub mod harness;
pub mod model_io;
pub mod numerics;
pub mod predictor;
pub mod stats;

pub use error::{Error, Result};
