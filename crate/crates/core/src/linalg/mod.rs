//! Dense complex linear algebra written for this crate.
//!
//! * [`eigenvalues`]: balancing, Householder reduction to Hessenberg form
//!   and shifted QR with deflation (Francis double shift for real input,
//!   single Wilkinson shift for complex input).
//! * [`singular_values`]: Householder bidiagonalization followed by
//!   implicit-shift QR on the bidiagonal.
//! * [`OrthoBasis`], [`project_complement`], [`distance_to_span`]: modified
//!   Gram-Schmidt with one reorthogonalization pass.
//!
//! Kernels are single threaded. Callers parallelise over matrices.

mod eigen;
mod householder;
mod matrix;
mod projection;
mod scalar;
mod summary;
mod svd;

pub use eigen::{eigen_residuals, eigenvalues, eigenvalues_with, EigenOptions};
pub use matrix::ComplexDenseMatrix;
pub use projection::{distance_to_span, leave_one_out_distances, project_complement, OrthoBasis};
pub use scalar::Scalar;
pub use summary::SpectralSummary;
pub use svd::{numerical_zero_floor, singular_values, singular_values_real};

/// Largest dimension the dense kernels accept.
pub const DEFAULT_SIZE_GUARD: usize = 4096;

pub(crate) fn norm2(v: &[crate::Complex64]) -> f64 {
    // Scaled accumulation avoids overflow and underflow for extreme entries.
    let mut scale = 0.0f64;
    let mut ssq = 1.0f64;
    for z in v {
        for x in [z.re, z.im] {
            if x != 0.0 {
                let a = x.abs();
                if scale < a {
                    ssq = 1.0 + ssq * (scale / a) * (scale / a);
                    scale = a;
                } else {
                    ssq += (a / scale) * (a / scale);
                }
            }
        }
    }
    scale * ssq.sqrt()
}
