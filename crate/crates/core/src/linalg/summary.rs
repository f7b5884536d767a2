use std::fmt::Write as _;

use super::{
    eigen_residuals, eigenvalues_with, numerical_zero_floor, singular_values, ComplexDenseMatrix, EigenOptions,
};
use crate::error::{invalid, Result};
use crate::Complex64;

/// Eigenvalues and singular values of one square matrix with per-eigenvalue
/// backward errors.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<Complex64>,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
    /// `||M v - lambda v|| / ||M||_F` for each eigenvalue.
    pub backward_errors: Vec<f64>,
    /// Singular values below this level are numerically indistinguishable
    /// from zero.
    pub zero_floor: f64,
}

impl SpectralSummary {
    pub fn compute(m: &ComplexDenseMatrix) -> Result<Self> {
        Self::compute_with(m, &EigenOptions::default())
    }

    pub fn compute_with(m: &ComplexDenseMatrix, opts: &EigenOptions) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid("spectral summary needs a square matrix"));
        }
        let eigenvalues = eigenvalues_with(m, opts)?;
        let singular_values = singular_values(m)?;
        let backward_errors = eigen_residuals(m, &eigenvalues)?;
        let zero_floor = numerical_zero_floor(m.rows(), m.cols(), singular_values.first().copied().unwrap_or(0.0));
        Ok(Self {
            eigenvalues,
            singular_values,
            backward_errors,
            zero_floor,
        })
    }

    pub fn n(&self) -> usize {
        self.singular_values.len()
    }

    pub fn smallest_singular_value(&self) -> Option<f64> {
        self.singular_values.last().copied()
    }

    /// Flags singular values that sit below [`Self::zero_floor`].
    pub fn numerically_zero(&self) -> Vec<bool> {
        self.singular_values.iter().map(|&s| s <= self.zero_floor).collect()
    }

    /// CSV with header `index,re_lambda,im_lambda,s,backward_error`.
    /// Eigenvalues are listed by decreasing modulus; row `i` pairs the
    /// `i`-th eigenvalue with the `i`-th singular value.
    pub fn to_csv(&self) -> String {
        let mut order: Vec<usize> = (0..self.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (self.eigenvalues[a], self.eigenvalues[b]);
            y.norm()
                .total_cmp(&x.norm())
                .then(y.re.total_cmp(&x.re))
                .then(y.im.total_cmp(&x.im))
        });
        let mut out = String::from("index,re_lambda,im_lambda,s,backward_error\n");
        for (row, &k) in order.iter().enumerate() {
            let lam = self.eigenvalues[k];
            let _ = writeln!(
                out,
                "{row},{:?},{:?},{:?},{:?}",
                lam.re, lam.im, self.singular_values[row], self.backward_errors[k]
            );
        }
        out
    }
}
