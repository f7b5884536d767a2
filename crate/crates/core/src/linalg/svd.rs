use super::householder::bidiagonalize;
use super::matrix::ComplexDenseMatrix;
use super::DEFAULT_SIZE_GUARD;
use crate::error::{invalid, Error, Result};

const EPS: f64 = f64::EPSILON;

/// Singular values in nonincreasing order.
///
/// Tiny values are returned as computed, never clamped; see
/// [`numerical_zero_floor`] for the level below which they are noise.
pub fn singular_values(m: &ComplexDenseMatrix) -> Result<Vec<f64>> {
    let (r, c) = (m.rows(), m.cols());
    if r.max(c) > DEFAULT_SIZE_GUARD {
        return Err(invalid(format!("dimension {} exceeds the size guard", r.max(c))));
    }
    if r == 0 || c == 0 {
        return Ok(Vec::new());
    }
    if m.is_real() {
        return singular_values_real(r, c, &m.real_parts());
    }
    let (diag, sup) = if r >= c {
        bidiagonalize(m.as_slice().to_vec(), r, c)
    } else {
        bidiagonalize(m.adjoint().as_slice().to_vec(), c, r)
    };
    bidiagonal_singular_values(diag, sup)
}

/// Singular values of a real row-major `rows x cols` matrix.
pub fn singular_values_real(rows: usize, cols: usize, data: &[f64]) -> Result<Vec<f64>> {
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for a {rows}x{cols} matrix",
            data.len()
        )));
    }
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    let (diag, sup) = if rows >= cols {
        bidiagonalize(data.to_vec(), rows, cols)
    } else {
        let mut t = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = data[i * cols + j];
            }
        }
        bidiagonalize(t, cols, rows)
    };
    bidiagonal_singular_values(diag, sup)
}

/// Level `max(rows, cols) * eps * s_1` below which a computed singular value
/// cannot be distinguished from zero by a backward-stable algorithm.
pub fn numerical_zero_floor(rows: usize, cols: usize, s_max: f64) -> f64 {
    rows.max(cols) as f64 * EPS * s_max
}

fn rot(f: f64, g: f64) -> (f64, f64, f64) {
    if g == 0.0 {
        (1.0, 0.0, f)
    } else if f == 0.0 {
        (0.0, 1.0, g)
    } else {
        let r = f.hypot(g);
        (f / r, g / r, r)
    }
}

/// Implicit-shift QR on the upper bidiagonal `(diag, sup)`.
fn bidiagonal_singular_values(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    let scale = d.iter().chain(&e).fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        if !scale.is_finite() {
            return Err(invalid("non-finite entries in bidiagonal"));
        }
        return Ok(vec![0.0; n]);
    }
    d.iter_mut().for_each(|x| *x /= scale);
    e.iter_mut().for_each(|x| *x /= scale);
    let tiny = EPS;
    let cap = 40 * n.max(1);
    let mut sweeps = 0usize;
    loop {
        for i in 0..n.saturating_sub(1) {
            if e[i] != 0.0 && e[i].abs() <= EPS * (d[i].abs() + d[i + 1].abs()) {
                e[i] = 0.0;
            }
        }
        let mut hi = n - 1;
        while hi > 0 && e[hi - 1] == 0.0 {
            hi -= 1;
        }
        if hi == 0 {
            break;
        }
        let mut lo = hi - 1;
        while lo > 0 && e[lo - 1] != 0.0 {
            lo -= 1;
        }
        sweeps += 1;
        if sweeps > cap {
            return Err(Error::NoConvergence {
                routine: "bidiagonal QR",
                iterations: sweeps,
            });
        }
        if let Some(k) = (lo..hi).find(|&k| d[k].abs() <= tiny) {
            // Zero diagonal inside the block: rotate e[k] into the rows below.
            let mut f = e[k];
            e[k] = 0.0;
            for j in k + 1..=hi {
                let (c, s, r) = rot(d[j], f);
                d[j] = r;
                if j < hi {
                    f = -s * e[j];
                    e[j] *= c;
                }
            }
            continue;
        }
        if d[hi].abs() <= tiny {
            // Zero trailing diagonal: rotate e[hi-1] into the columns above.
            let mut f = e[hi - 1];
            e[hi - 1] = 0.0;
            for j in (lo..hi).rev() {
                let (c, s, r) = rot(d[j], f);
                d[j] = r;
                if j > lo {
                    f = -s * e[j - 1];
                    e[j - 1] *= c;
                }
            }
            continue;
        }
        golub_kahan_step(&mut d, &mut e, lo, hi);
    }
    let mut s: Vec<f64> = d.into_iter().map(|x| x.abs() * scale).collect();
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(s)
}

fn golub_kahan_step(d: &mut [f64], e: &mut [f64], lo: usize, hi: usize) {
    // Wilkinson shift from the trailing 2x2 block of B^T B.
    let t11 = d[hi - 1] * d[hi - 1] + if hi - 1 > lo { e[hi - 2] * e[hi - 2] } else { 0.0 };
    let t12 = d[hi - 1] * e[hi - 1];
    let t22 = d[hi] * d[hi] + e[hi - 1] * e[hi - 1];
    let delta = 0.5 * (t11 - t22);
    let mu = if t12 == 0.0 {
        t22
    } else {
        let denom = delta + (delta.hypot(t12)).copysign(if delta == 0.0 { 1.0 } else { delta });
        t22 - t12 * t12 / denom
    };
    let mut y = d[lo] * d[lo] - mu;
    let mut z = d[lo] * e[lo];
    for k in lo..hi {
        let (c, s, r) = rot(y, z);
        if k > lo {
            e[k - 1] = r;
        }
        y = c * d[k] + s * e[k];
        e[k] = c * e[k] - s * d[k];
        z = s * d[k + 1];
        d[k + 1] *= c;
        let (c, s, r) = rot(y, z);
        d[k] = r;
        y = c * e[k] + s * d[k + 1];
        d[k + 1] = c * d[k + 1] - s * e[k];
        if k + 1 < hi {
            z = s * e[k + 1];
            e[k + 1] *= c;
        }
    }
    e[hi - 1] = y;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    #[test]
    fn diagonal_values() {
        let m = ComplexDenseMatrix::from_real_rows(&[vec![3.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(singular_values(&m).unwrap(), vec![3.0, 0.0]);
    }

    #[test]
    fn permutation_is_orthogonal() {
        let n = 9;
        let m = ComplexDenseMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if j == (2 * i + 1) % n { 1.0 } else { 0.0 }, 0.0)
        });
        let s = singular_values(&m).unwrap();
        assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-12), "{s:?}");
    }

    #[test]
    fn rectangular_and_frobenius() {
        let m = ComplexDenseMatrix::from_fn(4, 7, |i, j| {
            Complex64::new((i as f64) - (j as f64) * 0.3, (i * j) as f64 * 0.1)
        });
        let s = singular_values(&m).unwrap();
        assert_eq!(s.len(), 4);
        let ssq: f64 = s.iter().map(|x| x * x).sum();
        assert!((ssq - m.hs_norm_sqr()).abs() < 1e-12 * m.hs_norm_sqr());
        let st = singular_values(&m.adjoint()).unwrap();
        for (a, b) in s.iter().zip(&st) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn graded_bidiagonal_keeps_small_values() {
        // diag(1, 1e-8, 1e-16) has exact singular values equal to its entries.
        let m = ComplexDenseMatrix::from_real_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1e-8, 0.0], vec![0.0, 0.0, 1e-16]])
            .unwrap();
        let s = singular_values(&m).unwrap();
        assert_eq!(s, vec![1.0, 1e-8, 1e-16]);
    }
}
