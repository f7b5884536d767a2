//! Shifted matrices, empirical measures and the quantities that connect
//! singular values of `B_z = d^{-1/2} A - z Id` to the spectrum of `A`.
//!
//! Singular values are indexed from 1 in nonincreasing order throughout, so
//! `s_1` is the largest and `s_n` the smallest.

use std::f64::consts::PI;

use serde::Serialize;

use crate::digraph::RegularDigraph;
use crate::error::{invalid, Result};
use crate::linalg::{singular_values, ComplexDenseMatrix};
use crate::Complex64;

/// Floor applied inside logarithms unless the caller asks otherwise.
pub const DEFAULT_LOG_FLOOR: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftSpec {
    pub z: Complex64,
    pub scale: f64,
}

impl ShiftSpec {
    pub fn new(z: Complex64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("scale must be positive and finite, got {scale}")));
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(invalid("shift must be finite"));
        }
        Ok(Self { z, scale })
    }

    /// The shift `d^{-1/2} A - z Id`.
    pub fn normalized(z: Complex64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d must be positive"));
        }
        Self::new(z, 1.0 / (d as f64).sqrt())
    }
}

/// `scale * A - z Id` as a dense complex matrix.
pub fn build_shifted(a: &RegularDigraph, spec: &ShiftSpec) -> ComplexDenseMatrix {
    a.to_complex(spec.scale).shifted(spec.z)
}

/// Uniform probability measure on a list of atoms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalMeasure<T> {
    atoms: Vec<T>,
}

impl<T> EmpiricalMeasure<T> {
    pub fn new(atoms: Vec<T>) -> Self {
        Self { atoms }
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }
}

/// Empirical spectral distribution of a list of eigenvalues.
pub fn esd(eigs: &[Complex64]) -> EmpiricalMeasure<Complex64> {
    EmpiricalMeasure::new(eigs.to_vec())
}

/// Empirical distribution of singular values.
pub fn svd_measure(svals: &[f64]) -> EmpiricalMeasure<f64> {
    EmpiricalMeasure::new(svals.to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogPotential {
    pub value: f64,
    /// Number of singular values raised to the floor.
    pub floored: usize,
}

/// `-(1/n) sum ln max(s_i, floor)`, the logarithmic potential of the ESD of
/// `B` at the shift already applied to `svals`.
pub fn log_potential_empirical(svals: &[f64], floor: f64) -> Result<LogPotential> {
    if !(floor > 0.0) {
        return Err(invalid(format!("floor must be positive, got {floor}")));
    }
    if svals.is_empty() {
        return Ok(LogPotential { value: 0.0, floored: 0 });
    }
    let mut floored = 0;
    let mut sum = 0.0;
    for &s in svals {
        if s < floor || s.is_nan() {
            floored += 1;
            sum += floor.ln();
        } else {
            sum += s.ln();
        }
    }
    Ok(LogPotential {
        value: -sum / svals.len() as f64,
        floored,
    })
}

/// Logarithmic potential of the ESD of `d^{-1/2} A` at `z`.
pub fn log_potential_at(a: &RegularDigraph, z: Complex64, floor: f64) -> Result<LogPotential> {
    let b = build_shifted(a, &ShiftSpec::normalized(z, a.d())?);
    log_potential_empirical(&singular_values(&b)?, floor)
}

/// Logarithmic potential of the uniform measure on the unit disk.
pub fn log_potential_circular(z: Complex64) -> f64 {
    let r = z.norm();
    if r < 1.0 {
        (1.0 - r * r) / 2.0
    } else {
        -r.ln()
    }
}

/// Density of the oriented Kesten-McKay law for degree `d`, supported on
/// `|z| < sqrt(d)`.
pub fn km_density(z: Complex64, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("Kesten-McKay density needs d >= 2, got {d}")));
    }
    let df = d as f64;
    let r2 = z.norm_sqr();
    if r2 >= df {
        return Ok(0.0);
    }
    let denom = df * df - r2;
    Ok(df * df * (df - 1.0) / (PI * denom * denom))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReferenceLaw {
    /// Uniform on the unit disk.
    Circular,
    /// Oriented Kesten-McKay law of degree `d`, on the unscaled spectrum.
    KestenMcKay { d: usize },
}

impl ReferenceLaw {
    pub fn density(&self, z: Complex64) -> Result<f64> {
        match *self {
            ReferenceLaw::Circular => Ok(if z.norm_sqr() < 1.0 { 1.0 / PI } else { 0.0 }),
            ReferenceLaw::KestenMcKay { d } => km_density(z, d),
        }
    }

    /// `P{|lambda| <= r}`.
    pub fn radial_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let r2 = r * r;
        match *self {
            ReferenceLaw::Circular => r2.min(1.0),
            ReferenceLaw::KestenMcKay { d } => {
                let df = d as f64;
                if r2 >= df {
                    1.0
                } else {
                    (df - 1.0) * r2 / (df * df - r2)
                }
            }
        }
    }

    /// Radius of the support.
    pub fn support_radius(&self) -> f64 {
        match *self {
            ReferenceLaw::Circular => 1.0,
            ReferenceLaw::KestenMcKay { d } => (d as f64).sqrt(),
        }
    }
}

/// Kolmogorov distance between the radial CDF of `mu` and that of `law`.
///
/// The empirical CDF is a staircase and the reference CDF is continuous and
/// nondecreasing, so the supremum is attained at an atom radius, on one
/// side of the jump. Tied radii form a single jump.
pub fn radial_cdf_distance(mu: &EmpiricalMeasure<Complex64>, law: &ReferenceLaw) -> f64 {
    let mut radii: Vec<f64> = mu.atoms().iter().map(|z| z.norm()).collect();
    radii.sort_by(f64::total_cmp);
    staircase_sup(&radii, |r| law.radial_cdf(r))
}

fn staircase_sup(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut sup = 0.0f64;
    let mut k = 0;
    while k < n {
        let x = sorted[k];
        let mut end = k + 1;
        while end < n && sorted[end] == x {
            end += 1;
        }
        let f = cdf(x);
        sup = sup.max((f - k as f64 / nf).abs()).max((end as f64 / nf - f).abs());
        k = end;
    }
    sup
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov-Smirnov test of `arg lambda` against the uniform law on
/// `[0, 2 pi)`.
pub fn angular_ks(mu: &EmpiricalMeasure<Complex64>) -> KsResult {
    let mut angles: Vec<f64> = mu
        .atoms()
        .iter()
        .map(|z| z.im.atan2(z.re).rem_euclid(2.0 * PI))
        .collect();
    angles.sort_by(f64::total_cmp);
    let statistic = staircase_sup(&angles, |t| (t / (2.0 * PI)).clamp(0.0, 1.0));
    KsResult {
        statistic,
        p_value: kolmogorov_pvalue(statistic, angles.len()),
    }
}

/// Asymptotic p-value of the one-sample Kolmogorov statistic, with the
/// Stephens small-sample correction.
pub fn kolmogorov_pvalue(statistic: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * statistic;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `floor(n - x)` for `x >= 0`, clamped at 0, computed as `n - ceil(x)` so
/// that large `x` cannot lose the integer part of `n`.
pub(crate) fn floor_n_minus(n: usize, x: f64) -> usize {
    if !(x > 0.0) {
        return n;
    }
    if x >= n as f64 {
        return 0;
    }
    n - x.ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailParams {
    pub t: f64,
    pub d: usize,
    /// Constant `C` in the first boundary `n - C n d^{-1/48}`.
    pub c_const: f64,
    pub floor: f64,
}

impl TailParams {
    pub fn new(t: f64, d: usize) -> Self {
        Self {
            t,
            d,
            c_const: 1.0,
            floor: DEFAULT_LOG_FLOOR,
        }
    }
}

/// Decomposition of `sum_{|ln s_i| >= T} |ln s_i|`.
///
/// Small values (`s_i <= e^{-T}`) are split by index into four regimes:
/// `i <= b_1`, then `i <= b_2`, then `i <= b_3`, then the rest, where
/// `b_1 = floor(n - C n d^{-1/48})`, `b_2 = floor(n - 2n d^{-3/2})` and
/// `b_3 = floor(n - n / ln^2 n)`. Each index goes to the first regime whose
/// bound it meets, so the regimes partition the small-value set even when
/// the bounds are not increasing. Large values (`s_i >= e^T`) are summed
/// separately.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub t: f64,
    pub n: usize,
    pub tail_sum: f64,
    pub regime_sums: [f64; 4],
    /// 1-based indices in each regime.
    pub regime_indices: [Vec<usize>; 4],
    pub large_sum: f64,
    pub large_indices: Vec<usize>,
    pub boundaries: [usize; 3],
    pub floored: usize,
}

pub fn regime_boundaries(n: usize, d: usize, c_const: f64) -> [usize; 3] {
    let nf = n as f64;
    let df = d as f64;
    let ln2 = nf.ln().powi(2);
    let b3 = if ln2 > 0.0 { floor_n_minus(n, nf / ln2) } else { 0 };
    [
        floor_n_minus(n, c_const * nf * df.powf(-1.0 / 48.0)),
        floor_n_minus(n, 2.0 * nf * df.powf(-1.5)),
        b3,
    ]
}

pub fn tail_log_sum(svals: &[f64], params: &TailParams) -> Result<TailReport> {
    if !(params.t > 0.0) {
        return Err(invalid(format!("threshold T must be positive, got {}", params.t)));
    }
    if params.d == 0 || !(params.floor > 0.0) {
        return Err(invalid("tail report needs d >= 1 and a positive floor"));
    }
    let n = svals.len();
    let boundaries = regime_boundaries(n, params.d, params.c_const);
    let mut report = TailReport {
        t: params.t,
        n,
        tail_sum: 0.0,
        regime_sums: [0.0; 4],
        regime_indices: Default::default(),
        large_sum: 0.0,
        large_indices: Vec::new(),
        boundaries,
        floored: 0,
    };
    for (k, &s) in svals.iter().enumerate() {
        let i = k + 1;
        let l = if s < params.floor || s.is_nan() {
            report.floored += 1;
            params.floor.ln()
        } else {
            s.ln()
        };
        if l <= -params.t {
            let r = boundaries.iter().position(|&b| i <= b).unwrap_or(3);
            report.regime_sums[r] += -l;
            report.regime_indices[r].push(i);
        } else if l >= params.t {
            report.large_sum += l;
            report.large_indices.push(i);
        }
    }
    report.tail_sum = report.regime_sums.iter().sum::<f64>() + report.large_sum;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SvBoundParams {
    /// `C` in the range `k <= n - C n d^{-1/48}` of the lower-range bound.
    pub cook_c_range: f64,
    /// `c` in `s_k(B_z) >= c (n - k) / n`.
    pub cook_c_bound: f64,
    /// `C` in `s_k >= exp(-C (n / (n - k))^{1/144})`.
    pub inter_c: f64,
}

impl Default for SvBoundParams {
    fn default() -> Self {
        Self {
            cook_c_range: 1.0,
            cook_c_bound: 0.1,
            inter_c: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    /// Whether the hypotheses on the shift hold (the check runs regardless).
    pub applicable: bool,
    /// Number of indices in the checked range.
    pub checked: usize,
    pub pass: bool,
    /// 1-based index attaining the smallest margin.
    pub tightest_k: Option<usize>,
    /// `min_k ln(s_k / bound_k)`; negative iff some index fails.
    pub margin: f64,
}

impl BoundCheck {
    fn run(name: &'static str, applicable: bool, items: impl Iterator<Item = (usize, f64, f64)>) -> Self {
        let mut check = Self {
            name,
            applicable,
            checked: 0,
            pass: true,
            tightest_k: None,
            margin: f64::INFINITY,
        };
        for (k, s, bound) in items {
            check.checked += 1;
            let m = if s <= 0.0 { f64::NEG_INFINITY } else { (s / bound).ln() };
            if check.tightest_k.is_none() || m < check.margin {
                check.margin = m;
                check.tightest_k = Some(k);
            }
        }
        check.pass = check.margin >= 0.0;
        check
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SvBoundReport {
    pub smin: BoundCheck,
    pub cook_anti: BoundCheck,
    pub inter_sv: BoundCheck,
}

/// `1 ..= n - C n d^{-1/48}`.
fn cook_range(n: usize, d: usize, params: &SvBoundParams) -> std::ops::RangeInclusive<usize> {
    1..=floor_n_minus(n, params.cook_c_range * n as f64 * (d as f64).powf(-1.0 / 48.0))
}

fn cook_bound(n: usize, k: usize, params: &SvBoundParams) -> f64 {
    params.cook_c_bound * (n - k) as f64 / n as f64
}

/// `n - 2n d^{-3/2} <= k <= n - 3n / ln^{144} n`, clipped to `1..n`.
fn inter_range(n: usize, d: usize) -> std::ops::RangeInclusive<usize> {
    let nf = n as f64;
    // Lower end: the least integer k with k >= n - 2n d^{-3/2}.
    let lo = (n - ((2.0 * nf * (d as f64).powf(-1.5)).floor() as usize).min(n)).max(1);
    let ln144 = nf.ln().powi(144);
    let hi = if ln144.is_finite() && ln144 > 0.0 {
        floor_n_minus(n, 3.0 * nf / ln144)
    } else {
        0
    };
    lo..=hi.min(n - 1)
}

fn inter_bound(n: usize, k: usize, params: &SvBoundParams) -> f64 {
    (-params.inter_c * (n as f64 / (n - k) as f64).powf(1.0 / 144.0)).exp()
}

/// The three bounds of [`sv_bound_check`] as `(k, bound)` points, all
/// expressed for `B = d^{-1/2}(A - w Id)` so they can be drawn against one
/// singular-value profile.
pub fn bound_curves(n: usize, d: usize, params: &SvBoundParams) -> [(&'static str, Vec<(usize, f64)>); 3] {
    let sqrt_d = (d as f64).sqrt();
    [
        (
            "smin",
            if n > 0 {
                vec![(n, (n as f64).powi(-6) / sqrt_d)]
            } else {
                vec![]
            },
        ),
        (
            "cook-anti",
            cook_range(n, d, params)
                .map(|k| (k, cook_bound(n, k, params)))
                .collect(),
        ),
        (
            "inter-sv",
            inter_range(n, d)
                .map(|k| (k, inter_bound(n, k, params) / sqrt_d))
                .collect(),
        ),
    ]
}

/// Checks three singular-value lower bounds on `A - w Id`.
///
/// `svals` are the singular values of the unscaled `A - w Id`, in
/// nonincreasing order. The middle-range bound is stated for
/// `B = d^{-1/2}(A - w Id)` and is checked on `s / sqrt(d)`.
///
/// * `smin`: `s_n >= n^{-6}`, applicable when `|w| <= d / 6`.
/// * `cook_anti`: `s_k(B) >= c (n - k) / n` for `k <= n - C n d^{-1/48}`.
/// * `inter_sv`: `s_k >= exp(-C (n / (n - k))^{1/144})` for
///   `n - 2n d^{-3/2} <= k <= n - 3n / ln^{144} n`.
pub fn sv_bound_check(svals: &[f64], d: usize, w: Complex64, params: &SvBoundParams) -> Result<SvBoundReport> {
    let n = svals.len();
    if n == 0 || d == 0 {
        return Err(invalid("bound check needs n >= 1 and d >= 1"));
    }
    let nf = n as f64;
    let df = d as f64;
    let s = |k: usize| svals[k - 1];

    let smin = BoundCheck::run("smin", w.norm() <= df / 6.0, std::iter::once((n, s(n), nf.powi(-6))));

    let sqrt_d = df.sqrt();
    let cook_anti = BoundCheck::run(
        "cook-anti",
        true,
        cook_range(n, d, params).map(|k| (k, s(k) / sqrt_d, cook_bound(n, k, params))),
    );
    let inter_sv = BoundCheck::run(
        "inter-sv",
        true,
        inter_range(n, d).map(|k| (k, s(k), inter_bound(n, k, params))),
    );
    Ok(SvBoundReport {
        smin,
        cook_anti,
        inter_sv,
    })
}
