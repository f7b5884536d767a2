//! Householder reflectors `H = I - tau v v^H` with `v[0] = 1`, in the
//! convention where `H^H x = beta e_1` with `beta` real. Real `beta` makes the
//! bidiagonal of a complex matrix real without extra phase fixing.

use super::scalar::Scalar;

fn norm<T: Scalar>(x: &[T]) -> f64 {
    let mut scale = 0.0f64;
    let mut ssq = 1.0f64;
    for z in x {
        for a in [z.re().abs(), z.im().abs()] {
            if a != 0.0 {
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

/// Overwrites `x` with `v` (so `x[0] = 1`) and returns `(tau, beta)`.
pub(crate) fn make_reflector<T: Scalar>(x: &mut [T]) -> (T, f64) {
    let alpha = x[0];
    let xnorm = norm(&x[1..]);
    if xnorm == 0.0 && alpha.im() == 0.0 {
        x[0] = T::from_re(1.0);
        return (T::zero(), alpha.re());
    }
    let mag = alpha.re().hypot(alpha.im()).hypot(xnorm);
    let beta = if alpha.re() >= 0.0 { -mag } else { mag };
    let tau = T::from_parts((beta - alpha.re()) / beta, -alpha.im() / beta);
    let inv = T::from_re(1.0) / (alpha - T::from_re(beta));
    for xi in &mut x[1..] {
        *xi *= inv;
    }
    x[0] = T::from_re(1.0);
    (tau, beta)
}

/// `A[r0.., c0..] <- (I - conj(tau) v v^H) A[r0.., c0..]` on a row-major
/// matrix with `cols` columns; `v.len()` rows starting at `r0`.
pub(crate) fn apply_left_adjoint<T: Scalar>(
    a: &mut [T],
    cols: usize,
    r0: usize,
    c0: usize,
    v: &[T],
    tau: T,
    work: &mut Vec<T>,
) {
    if tau == T::zero() {
        return;
    }
    let width = cols - c0;
    work.clear();
    work.resize(width, T::zero());
    for (k, &vk) in v.iter().enumerate() {
        let vc = vk.conj();
        let row = &a[(r0 + k) * cols + c0..(r0 + k + 1) * cols];
        for (w, &x) in work.iter_mut().zip(row) {
            *w += vc * x;
        }
    }
    let t = tau.conj();
    for (k, &vk) in v.iter().enumerate() {
        let f = t * vk;
        let row = &mut a[(r0 + k) * cols + c0..(r0 + k + 1) * cols];
        for (x, &w) in row.iter_mut().zip(work.iter()) {
            *x -= f * w;
        }
    }
}

/// `A[r0..r1, c0..] <- A[r0..r1, c0..] (I - tau v v^H)`.
pub(crate) fn apply_right<T: Scalar>(
    a: &mut [T],
    cols: usize,
    rows: std::ops::Range<usize>,
    c0: usize,
    v: &[T],
    tau: T,
) {
    if tau == T::zero() {
        return;
    }
    let vc: Vec<T> = v.iter().map(|x| x.conj()).collect();
    for i in rows {
        let row = &mut a[i * cols + c0..i * cols + c0 + v.len()];
        let mut dot = T::zero();
        for (&x, &vj) in row.iter().zip(v) {
            dot += x * vj;
        }
        let f = tau * dot;
        for (x, &c) in row.iter_mut().zip(&vc) {
            *x -= f * c;
        }
    }
}

/// A unitary similarity `Q^H A Q` in upper Hessenberg form, keeping the
/// reflectors that build `Q = H_0 H_1 ... H_{n-3}`.
pub(crate) struct Hessenberg<T> {
    pub h: Vec<T>,
    reflectors: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> Hessenberg<T> {
    pub fn reduce(mut a: Vec<T>, n: usize) -> Self {
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut work = Vec::new();
        let mut v = Vec::with_capacity(n);
        for k in 0..n.saturating_sub(2) {
            v.clear();
            v.extend((k + 1..n).map(|i| a[i * n + k]));
            let (tau, beta) = make_reflector(&mut v);
            apply_left_adjoint(&mut a, n, k + 1, k, &v, tau, &mut work);
            apply_right(&mut a, n, 0..n, k + 1, &v, tau);
            a[(k + 1) * n + k] = T::from_re(beta);
            for i in k + 2..n {
                a[i * n + k] = T::zero();
            }
            reflectors.push((v.clone(), tau));
        }
        Self { h: a, reflectors }
    }

    /// `y <- Q y`.
    pub fn apply_q(&self, y: &mut [T]) {
        for (k, (v, tau)) in self.reflectors.iter().enumerate().rev() {
            let seg = &mut y[k + 1..];
            let mut dot = T::zero();
            for (&x, &vi) in seg.iter().zip(v) {
                dot += vi.conj() * x;
            }
            let f = *tau * dot;
            for (x, &vi) in seg.iter_mut().zip(v) {
                *x -= f * vi;
            }
        }
    }
}

/// Reduces a row-major `m x n` matrix with `m >= n` to upper bidiagonal form
/// by unitary transformations on both sides and returns the real diagonal and
/// superdiagonal.
pub(crate) fn bidiagonalize<T: Scalar>(mut a: Vec<T>, m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert!(m >= n);
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n.saturating_sub(1)];
    let mut work = Vec::new();
    let mut v = Vec::with_capacity(m);
    for k in 0..n {
        v.clear();
        v.extend((k..m).map(|i| a[i * n + k]));
        let (tau, beta) = make_reflector(&mut v);
        if k + 1 < n {
            apply_left_adjoint(&mut a, n, k, k + 1, &v, tau, &mut work);
        }
        diag[k] = beta;
        if k + 1 < n {
            v.clear();
            v.extend((k + 1..n).map(|j| a[k * n + j].conj()));
            let (tau, beta) = make_reflector(&mut v);
            apply_right(&mut a, n, k + 1..m, k + 1, &v, tau);
            sup[k] = beta;
        }
    }
    (diag, sup)
}
