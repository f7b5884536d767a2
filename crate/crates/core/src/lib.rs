//! Simulation toolkit for the circular law of sparse random regular digraphs.
//!
//! The crate is organised around five areas:
//!
//! * [`digraph`]: the set of `n x n` 0/1 matrices with all row and column
//!   sums equal to `d` (loops allowed, multi-edges forbidden), with exact and
//!   Markov-chain samplers, enumeration oracles and simple switchings.
//! * [`linalg`]: dense complex kernels (eigenvalues, singular values,
//!   projections onto orthogonal complements of row spans).
//! * [`hermitization`]: shifted matrices, empirical spectral measures,
//!   logarithmic potentials, reference laws and singular-value regime checks.
//! * [`normals`]: complex Gaussian vectors, uniform random normals, order
//!   statistics, strongly correlated index clusters and level counting.
//! * [`anticonc`]: the conditional row-resampling distribution, the
//!   multinomial coupling and distance-to-span experiments.
//!
//! All randomness flows through [`rng::TrialRng`], seeded from a master seed
//! and a trial index, so every experiment is reproducible bit for bit.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anticonc;
pub mod digraph;
pub mod error;
pub mod hermitization;
pub mod linalg;
pub mod normals;
pub mod record;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;
