//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerical kernels.

#![allow(dead_code)]

use circlaw_core::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `int_a^b f` by composite Gauss-Legendre with `panels` panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(lo + (xi + 1.0) * h / 2.0) * h / 2.0;
        }
    }
    sum
}

/// `ln |det M|` from Householder QR with column pivoting on a row-major
/// square matrix.
pub fn qrcp_log_abs_det(n: usize, data: &[Complex64]) -> f64 {
    let mut a = data.to_vec();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut logdet = 0.0;
    for k in 0..n {
        let norms: Vec<f64> = (k..n)
            .map(|j| (k..n).map(|i| a[i * n + cols[j]].norm_sqr()).sum())
            .collect();
        let p = k + norms
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, _)| i)
            .unwrap();
        cols.swap(k, p);
        let c = cols[k];
        let alpha = a[k * n + c];
        let norm = norms[p - k].sqrt();
        if norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        let phase = if alpha.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * norm;
        let mut v: Vec<Complex64> = (k..n).map(|i| a[i * n + c]).collect();
        v[0] -= beta;
        let vn: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        logdet += norm.ln();
        if vn == 0.0 {
            continue;
        }
        for &cj in &cols[k..] {
            let dot: Complex64 = (k..n).map(|i| v[i - k].conj() * a[i * n + cj]).sum();
            let f = dot * 2.0 / vn;
            for i in k..n {
                a[i * n + cj] -= f * v[i - k];
            }
        }
    }
    logdet
}

/// Distance from `v` to the span of `rows` via Givens QR of the matrix with
/// columns `rows..., v`. The rows must be linearly independent.
pub fn givens_distance(v: &[Complex64], rows: &[Vec<Complex64>]) -> f64 {
    let n = v.len();
    let k = rows.len();
    let mut cols: Vec<Vec<Complex64>> = rows.to_vec();
    cols.push(v.to_vec());
    for c in 0..k {
        for r in (c + 1..n).rev() {
            let (f, g) = (cols[c][r - 1], cols[c][r]);
            if g.norm() == 0.0 {
                continue;
            }
            let h = (f.norm_sqr() + g.norm_sqr()).sqrt();
            let (cs, sn) = (f / h, g / h);
            for col in cols.iter_mut().skip(c) {
                let (x, y) = (col[r - 1], col[r]);
                col[r - 1] = cs.conj() * x + sn.conj() * y;
                col[r] = -sn * x + cs * y;
            }
        }
    }
    cols[k][k..].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Every `n x n` 0/1 matrix with all line sums `d`, by brute force over
/// all `2^{n^2}` bit patterns, as row-major bit strings in increasing order.
pub fn brute_force_regular(n: usize, d: usize) -> Vec<Vec<u8>> {
    let cells = n * n;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << cells) {
        if mask.count_ones() as usize != n * d {
            continue;
        }
        let bit = |i: usize, j: usize| (mask >> (cells - 1 - (i * n + j))) & 1;
        let rows_ok = (0..n).all(|i| (0..n).map(|j| bit(i, j)).sum::<u64>() == d as u64);
        let cols_ok = (0..n).all(|j| (0..n).map(|i| bit(i, j)).sum::<u64>() == d as u64);
        if rows_ok && cols_ok {
            out.push((0..cells).map(|c| ((mask >> (cells - 1 - c)) & 1) as u8).collect());
        }
    }
    out
}

/// Upper-tail p-value of Pearson's statistic against equal expected counts.
pub fn chi_square_uniform_pvalue(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    chi_square_pvalue(counts, &vec![expected; counts.len()])
}

pub fn chi_square_pvalue(counts: &[usize], expected: &[f64]) -> f64 {
    let stat: f64 = counts
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian_matrix(n: usize, rng: &mut impl rand::Rng) -> Vec<Complex64> {
    (0..n * n)
        .map(|_| circlaw_core::normals::standard_complex_gaussian(rng))
        .collect()
}
