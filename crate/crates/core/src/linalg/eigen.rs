use super::householder::Hessenberg;
use super::matrix::ComplexDenseMatrix;
use super::scalar::Scalar;
use super::DEFAULT_SIZE_GUARD;
use crate::error::{invalid, Error, Result};
use crate::Complex64;

const EPS: f64 = f64::EPSILON;
const RADIX: f64 = 2.0;

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Diagonal similarity scaling before the Hessenberg reduction.
    pub balance: bool,
    pub size_guard: usize,
    /// Total QR sweeps allowed, as a multiple of `n`.
    pub sweeps_per_row: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            balance: true,
            size_guard: DEFAULT_SIZE_GUARD,
            sweeps_per_row: 40,
        }
    }
}

/// All eigenvalues of a square matrix, with multiplicity, in the order the
/// deflation produced them.
pub fn eigenvalues(m: &ComplexDenseMatrix) -> Result<Vec<Complex64>> {
    eigenvalues_with(m, &EigenOptions::default())
}

pub fn eigenvalues_with(m: &ComplexDenseMatrix, opts: &EigenOptions) -> Result<Vec<Complex64>> {
    check_square(m, opts.size_guard)?;
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let cap = opts.sweeps_per_row.max(1) * n;
    if m.is_real() {
        let mut a = m.real_parts();
        if opts.balance {
            balance(&mut a, n);
        }
        let hess = Hessenberg::reduce(a, n);
        hqr_real(hess.h, n, cap)
    } else {
        let mut a = m.as_slice().to_vec();
        if opts.balance {
            balance(&mut a, n);
        }
        let hess = Hessenberg::reduce(a, n);
        qr_complex(hess.h, n, cap)
    }
}

fn check_square(m: &ComplexDenseMatrix, guard: usize) -> Result<()> {
    if !m.is_square() {
        return Err(invalid(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() > guard {
        return Err(invalid(format!(
            "dimension {} exceeds the size guard {guard}",
            m.rows()
        )));
    }
    Ok(())
}

/// Radix-2 diagonal scaling `D^{-1} A D` that roughly equalises row and
/// column norms. Returns the diagonal of `D`.
fn balance<T: Scalar>(a: &mut [T], n: usize) -> Vec<f64> {
    let mut scale = vec![1.0; n];
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].abs1();
                    r += a[i * n + j].abs1();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                scale[i] *= f;
                for j in 0..n {
                    a[i * n + j] = a[i * n + j].scale(g);
                }
                for j in 0..n {
                    a[j * n + i] = a[j * n + i].scale(f);
                }
            }
        }
        if done {
            return scale;
        }
    }
}

/// Francis double-shift QR on a real upper Hessenberg matrix; values only,
/// so transformations are confined to the active window.
fn hqr_real(mut a: Vec<f64>, n: usize, cap: usize) -> Result<Vec<Complex64>> {
    let idx = |i: usize, j: usize| i * n + j;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[idx(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let mut sweeps = 0usize;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a[idx(l - 1, l - 1)].abs() + a[idx(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[idx(l, l - 1)].abs() <= EPS * s {
                    a[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[idx(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[idx(nu - 1, nu - 1)];
            let mut w = a[idx(nu, nu - 1)] * a[idx(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            sweeps += 1;
            if sweeps > cap || its >= 60 {
                return Err(Error::NoConvergence {
                    routine: "real Hessenberg QR",
                    iterations: sweeps,
                });
            }
            if its > 0 && its.is_multiple_of(10) {
                t += x;
                for i in 0..=nu {
                    a[idx(i, i)] -= x;
                }
                let s = a[idx(nu, nu - 1)].abs() + a[idx(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r);
            let mut m = nu - 2;
            loop {
                let z = a[idx(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[idx(m + 1, m)] + a[idx(m, m + 1)];
                q = a[idx(m + 1, m + 1)] - z - rr - ss;
                r = a[idx(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[idx(m - 1, m - 1)].abs() + z.abs() + a[idx(m + 1, m + 1)].abs());
                if u <= EPS * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[idx(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[idx(i, i - 3)] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[idx(k, k - 1)];
                    q = a[idx(k + 1, k - 1)];
                    r = if k != nu - 1 { a[idx(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[idx(k, k - 1)] = -a[idx(k, k - 1)];
                        }
                    } else {
                        a[idx(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[idx(k, j)] + q * a[idx(k + 1, j)];
                        if k != nu - 1 {
                            pp += r * a[idx(k + 2, j)];
                            a[idx(k + 2, j)] -= pp * z;
                        }
                        a[idx(k + 1, j)] -= pp * y;
                        a[idx(k, j)] -= pp * x;
                    }
                    let mmin = nu.min(k + 3);
                    for i in l..=mmin {
                        let row = i * n;
                        let mut pp = x * a[row + k] + y * a[row + k + 1];
                        if k != nu - 1 {
                            pp += z * a[row + k + 2];
                            a[row + k + 2] -= pp * r;
                        }
                        a[row + k + 1] -= pp * q;
                        a[row + k] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Rotation `[c s; -conj(s) c]` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64, Complex64) {
    let ax = x.norm();
    if y == Complex64::new(0.0, 0.0) {
        return (1.0, Complex64::new(0.0, 0.0), x);
    }
    if ax == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0), y);
    }
    let nrm = ax.hypot(y.norm());
    let phase = x / ax;
    let c = ax / nrm;
    let s = phase * y.conj() / nrm;
    (c, s, phase * nrm)
}

/// Single-shift QR on a complex upper Hessenberg matrix with Wilkinson
/// shifts; values only.
fn qr_complex(mut h: Vec<Complex64>, n: usize, cap: usize) -> Result<Vec<Complex64>> {
    let idx = |i: usize, j: usize| i * n + j;
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut sweeps = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[0];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[idx(l - 1, l - 1)].abs1() + h[idx(l, l)].abs1();
            if h[idx(l, l - 1)].abs1() <= EPS * s || h[idx(l, l - 1)] == Complex64::new(0.0, 0.0) {
                h[idx(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[idx(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > cap || its >= 60 {
            return Err(Error::NoConvergence {
                routine: "complex Hessenberg QR",
                iterations: sweeps,
            });
        }
        its += 1;
        let mu = if its.is_multiple_of(10) {
            let s = h[idx(hi, hi - 1)].re.abs() + if hi >= 2 { h[idx(hi - 1, hi - 2)].re.abs() } else { 0.0 };
            h[idx(hi, hi)] + Complex64::new(s, 0.0)
        } else {
            let a = h[idx(hi - 1, hi - 1)];
            let b = h[idx(hi - 1, hi)];
            let c = h[idx(hi, hi - 1)];
            let d = h[idx(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = d + half + disc;
            let m2 = d + half - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        let mut x = h[idx(l, l)] - mu;
        let mut y = h[idx(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[idx(k, k - 1)];
                y = h[idx(k + 1, k - 1)];
            }
            let (c, s, r) = givens(x, y);
            if k > l {
                h[idx(k, k - 1)] = r;
                h[idx(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
            }
            let sc = s.conj();
            for j in k..=hi {
                let p = h[idx(k, j)];
                let q = h[idx(k + 1, j)];
                h[idx(k, j)] = p * c + s * q;
                h[idx(k + 1, j)] = q * c - sc * p;
            }
            for i in l..=(k + 2).min(hi) {
                let p = h[idx(i, k)];
                let q = h[idx(i, k + 1)];
                h[idx(i, k)] = p * c + sc * q;
                h[idx(i, k + 1)] = q * c - s * p;
            }
        }
    }
    Ok(eig)
}

/// Backward-error estimates `||M v - lambda v|| / ||M||_F` for each
/// eigenvalue, with `v` obtained by inverse iteration on the Hessenberg form
/// and mapped back to `M`.
pub fn eigen_residuals(m: &ComplexDenseMatrix, eigs: &[Complex64]) -> Result<Vec<f64>> {
    check_square(m, DEFAULT_SIZE_GUARD)?;
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mnorm = m.hs_norm();
    if mnorm == 0.0 {
        return Ok(vec![0.0; eigs.len()]);
    }
    let mut a = m.as_slice().to_vec();
    let scale = balance(&mut a, n);
    let hess = Hessenberg::reduce(a, n);
    let hnorm = super::norm2(&hess.h);
    let mut out = Vec::with_capacity(eigs.len());
    for &lambda in eigs {
        let mut y = hessenberg_inverse_iteration(&hess.h, n, lambda, hnorm);
        hess.apply_q(&mut y);
        for (yi, &s) in y.iter_mut().zip(&scale) {
            *yi *= s;
        }
        let nv = super::norm2(&y);
        if nv == 0.0 || !nv.is_finite() {
            out.push(f64::INFINITY);
            continue;
        }
        y.iter_mut().for_each(|v| *v /= nv);
        let mut r = m.mul_vec(&y);
        for (ri, yi) in r.iter_mut().zip(&y) {
            *ri -= lambda * yi;
        }
        out.push(super::norm2(&r) / mnorm);
    }
    Ok(out)
}

/// Two steps of inverse iteration with `(H - lambda I)` factored by
/// Hessenberg LU with adjacent-row pivoting.
fn hessenberg_inverse_iteration(h: &[Complex64], n: usize, lambda: Complex64, hnorm: f64) -> Vec<Complex64> {
    let tiny = EPS * hnorm.max(f64::MIN_POSITIVE);
    let mut u: Vec<Complex64> = h.to_vec();
    for i in 0..n {
        u[i * n + i] -= lambda;
    }
    // Row operations recorded as (swap, multiplier) for each elimination step.
    let mut ops = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let swap = u[(k + 1) * n + k].norm() > u[k * n + k].norm();
        if swap {
            for j in k..n {
                u.swap(k * n + j, (k + 1) * n + j);
            }
        }
        let mut piv = u[k * n + k];
        if piv.norm() < tiny {
            piv = Complex64::new(tiny, 0.0);
            u[k * n + k] = piv;
        }
        let l = u[(k + 1) * n + k] / piv;
        u[(k + 1) * n + k] = Complex64::new(0.0, 0.0);
        for j in k + 1..n {
            let t = u[k * n + j];
            u[(k + 1) * n + j] -= l * t;
        }
        ops.push((swap, l));
    }
    if u[(n - 1) * n + n - 1].norm() < tiny {
        u[(n - 1) * n + n - 1] = Complex64::new(tiny, 0.0);
    }
    let mut x = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    for _ in 0..2 {
        for (k, &(swap, l)) in ops.iter().enumerate() {
            if swap {
                x.swap(k, k + 1);
            }
            let t = x[k];
            x[k + 1] -= l * t;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= u[i * n + j] * x[j];
            }
            x[i] = s / u[i * n + i];
        }
        let nx = super::norm2(&x);
        if nx == 0.0 || !nx.is_finite() {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn identity_eigenvalues() {
        let e = eigenvalues(&ComplexDenseMatrix::identity(3)).unwrap();
        assert!(e.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn all_ones_is_rank_one() {
        for n in [2usize, 5, 17, 40] {
            let m = ComplexDenseMatrix::from_fn(n, n, |_, _| c(1.0, 0.0));
            let mut e = eigenvalues(&m).unwrap();
            e.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
            assert!((e[0] - c(n as f64, 0.0)).norm() < 1e-10);
            assert!(e[1..].iter().all(|z| z.norm() < 1e-10), "{e:?}");
        }
    }

    #[test]
    fn companion_of_x4_minus_1() {
        let m = ComplexDenseMatrix::from_real_rows(&[
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let e = sorted(eigenvalues(&m).unwrap());
        let expect = sorted(vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)]);
        for (a, b) in e.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn complex_triangular_and_rotation() {
        let m = ComplexDenseMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0)],
            vec![c(0.0, 0.0), c(-2.0, 0.5), c(1.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.25, -4.0)],
        ])
        .unwrap();
        let e = sorted(eigenvalues(&m).unwrap());
        let expect = sorted(vec![c(1.0, 1.0), c(-2.0, 0.5), c(0.25, -4.0)]);
        for (a, b) in e.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
        // Real rotation generator pushed through the complex path.
        let rot = ComplexDenseMatrix::from_real_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]])
            .unwrap()
            .shifted(c(0.0, 1e-300));
        let e = sorted(eigenvalues(&rot).unwrap());
        assert!((e[0] - c(0.0, -1.0)).norm() < 1e-12 && (e[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn residuals_are_small() {
        let m = ComplexDenseMatrix::from_fn(12, 12, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 * 0.5)
        });
        let e = eigenvalues(&m).unwrap();
        let r = eigen_residuals(&m, &e).unwrap();
        assert!(r.iter().all(|&x| x < 1e-12), "{r:?}");
    }

    #[test]
    fn rejects_rectangular() {
        assert!(eigenvalues(&ComplexDenseMatrix::zeros(2, 3)).is_err());
    }
}
