use super::householder::{apply_left_adjoint, make_reflector};
use super::{norm2, ComplexDenseMatrix};
use crate::error::{Error, Result};
use crate::Complex64;

/// Relative threshold below which a Gram-Schmidt residual is treated as a
/// numerically null direction and dropped.
pub const NULL_DIRECTION_TOL: f64 = 1e-12;

/// Orthonormal basis of the span of a list of vectors, built by modified
/// Gram-Schmidt with one reorthogonalization pass.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    dim: usize,
    vectors: Vec<Vec<Complex64>>,
}

/// `v <- v - q <q, v>` with `<q, v> = sum conj(q_k) v_k`.
#[inline]
fn remove_component(v: &mut [Complex64], q: &[Complex64]) {
    let mut dot = Complex64::new(0.0, 0.0);
    for (a, b) in q.iter().zip(v.iter()) {
        dot += a.conj() * b;
    }
    for (x, a) in v.iter_mut().zip(q) {
        *x -= dot * a;
    }
}

impl OrthoBasis {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            vectors: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<Complex64>]) -> Result<Self> {
        let mut basis = Self::empty(dim);
        for row in rows {
            basis.push(row)?;
        }
        Ok(basis)
    }

    pub fn from_matrix_rows(m: &ComplexDenseMatrix, idx: &[usize]) -> Result<Self> {
        let mut basis = Self::empty(m.cols());
        for &i in idx {
            basis.push(m.row(i))?;
        }
        Ok(basis)
    }

    /// Adds `row` to the spanning set. Returns whether it contributed a new
    /// direction.
    pub fn push(&mut self, row: &[Complex64]) -> Result<bool> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in dimension {}",
                row.len(),
                self.dim
            )));
        }
        let norm0 = norm2(row);
        if norm0 == 0.0 {
            return Ok(false);
        }
        let mut v = row.to_vec();
        self.sweep(&mut v);
        self.sweep(&mut v);
        let nv = norm2(&v);
        if nv <= NULL_DIRECTION_TOL * norm0 {
            return Ok(false);
        }
        v.iter_mut().for_each(|x| *x /= nv);
        self.vectors.push(v);
        Ok(true)
    }

    fn sweep(&self, v: &mut [Complex64]) {
        for q in &self.vectors {
            remove_component(v, q);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    /// `P_{E^perp} v` for `E` the span of this basis.
    pub fn project_complement(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in dimension {}",
                v.len(),
                self.dim
            )));
        }
        let mut out = v.to_vec();
        self.sweep(&mut out);
        self.sweep(&mut out);
        Ok(out)
    }

    pub fn distance(&self, v: &[Complex64]) -> Result<f64> {
        Ok(norm2(&self.project_complement(v)?))
    }
}

/// `v` minus its orthogonal projection onto the span of `row_basis`.
pub fn project_complement(row_basis: &[Vec<Complex64>], v: &[Complex64]) -> Result<Vec<Complex64>> {
    OrthoBasis::from_rows(v.len(), row_basis)?.project_complement(v)
}

/// Euclidean distance from `v` to the span of `rows`.
pub fn distance_to_span(v: &[Complex64], rows: &[Vec<Complex64>]) -> Result<f64> {
    Ok(norm2(&project_complement(rows, v)?))
}

/// Distance from each row of a full-row-rank `m x n` matrix to the span of
/// the other rows.
///
/// With the LQ factorisation `B = L Q`, the Gram matrix is `L L^H` and
/// `dist_i^{-2} = ((B B^H)^{-1})_{ii} = ||L^{-1} e_i||^2`, so all distances
/// cost one factorisation and one triangular inverse. Rows that are linearly
/// dependent on the others get distance 0.
pub fn leave_one_out_distances(b: &ComplexDenseMatrix) -> Result<Vec<f64>> {
    let (m, n) = (b.rows(), b.cols());
    if m == 0 {
        return Ok(Vec::new());
    }
    if m > n {
        return Ok(vec![0.0; m]);
    }
    // QR of B^H (n x m) gives B = R^H Q^H, so L = R^H.
    let mut a = b.adjoint().as_slice().to_vec();
    let mut work = Vec::new();
    let mut v = Vec::with_capacity(n);
    let mut r = vec![Complex64::new(0.0, 0.0); m * m];
    for k in 0..m {
        v.clear();
        v.extend((k..n).map(|i| a[i * m + k]));
        let (tau, beta) = make_reflector(&mut v);
        if k + 1 < m {
            apply_left_adjoint(&mut a, m, k, k + 1, &v, tau, &mut work);
        }
        r[k * m + k] = Complex64::new(beta, 0.0);
        for j in k + 1..m {
            r[k * m + j] = a[k * m + j];
        }
    }
    let rmax = (0..m).map(|k| r[k * m + k].norm()).fold(0.0, f64::max);
    // L = R^H is lower triangular; column i of L^{-1} solves L x = e_i.
    let mut dist = vec![0.0; m];
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        if r[i * m + i].norm() <= f64::EPSILON * rmax * m as f64 {
            dist[i] = 0.0;
            continue;
        }
        x.iter_mut().for_each(|t| *t = Complex64::new(0.0, 0.0));
        let mut singular = false;
        for row in i..m {
            // L[row][col] = conj(R[col][row])
            let mut s = if row == i {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for col in i..row {
                s -= r[col * m + row].conj() * x[col];
            }
            let diag = r[row * m + row].conj();
            if diag.norm() == 0.0 {
                singular = true;
                break;
            }
            x[row] = s / diag;
        }
        dist[i] = if singular { 0.0 } else { 1.0 / norm2(&x[i..]) };
    }
    Ok(dist)
}
