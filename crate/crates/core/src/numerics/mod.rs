//! Special functions, symmetric eigendecomposition, Cholesky factorization and
//! deterministic random streams.

mod linalg;
mod rng;
mod special;

pub use linalg::{cholesky, eig_sym, eig_sym_rank_bounded, SymEigen};
pub use rng::{sample_gaussian_vector, stream_id, RngStream};
pub use special::{
    digamma, digamma_diff, log_gamma, log_gamma_diff, log_multivariate_gamma, trigamma,
};

pub(crate) use special::{digamma_diff_unchecked, ln_gamma_diff_unchecked, trigamma_unchecked};
