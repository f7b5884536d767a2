//! Row resampling, the multinomial coupling and distance-to-span
//! experiments.
//!
//! Given `M`, an index set `J`, a row `u` outside `J` and a subset `I0` of
//! `J`, let `T = I0 + {u}` and let `M(M, T)` be the set of matrices that
//! agree with `M` outside the rows `T`. The random row `X` is row `u` of a
//! uniform element of `M(M, T)`.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::Serialize;

use crate::digraph::{
    binomial, enumerate_restricted, restricted_search_size, sample_uniform, RegularDigraph, SampleMethod,
    SamplerOptions,
};
use crate::error::{invalid, Error, Result};
use crate::hermitization::{build_shifted, ShiftSpec};
use crate::linalg::{leave_one_out_distances, singular_values, ComplexDenseMatrix, OrthoBasis};
use crate::normals::level_count;
use crate::record::FrequencyEstimate;
use crate::rng::{derive_seed, trial_rng, TrialRng};
use crate::Complex64;

/// `floor(n^{1/4})`, computed exactly.
pub fn canonical_i0_size(n: usize) -> usize {
    let mut r = (n as f64).powf(0.25).floor() as usize;
    while (r + 1).pow(4) <= n {
        r += 1;
    }
    while r > 0 && r.pow(4) > n {
        r -= 1;
    }
    r
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResamplerSpec {
    m: RegularDigraph,
    j: Vec<usize>,
    u: usize,
    i0: Vec<usize>,
}

impl ResamplerSpec {
    /// Validates `u` outside `J`, `2 |J| >= n` and `I0` a subset of `J`.
    /// Any size of `I0` is accepted; [`canonical_i0_size`] gives the usual
    /// one.
    pub fn new(m: RegularDigraph, j: Vec<usize>, u: usize, i0: Vec<usize>) -> Result<Self> {
        let n = m.n();
        let mut j = j;
        j.sort_unstable();
        j.dedup();
        let mut i0 = i0;
        i0.sort_unstable();
        i0.dedup();
        if j.iter().chain([&u]).any(|&i| i >= n) {
            return Err(invalid("row index out of range"));
        }
        if j.binary_search(&u).is_ok() {
            return Err(invalid(format!("u = {u} must lie outside J")));
        }
        if 2 * j.len() < n {
            return Err(invalid(format!("|J| = {} is below n/2", j.len())));
        }
        if i0.iter().any(|i| j.binary_search(i).is_err()) {
            return Err(invalid("I0 must be a subset of J"));
        }
        Ok(Self { m, j, u, i0 })
    }

    /// As [`Self::new`] with `I0` drawn by [`sample_i`] at the canonical size.
    pub fn with_random_i0(m: RegularDigraph, j: Vec<usize>, u: usize, rng: &mut TrialRng) -> Result<Self> {
        let size = canonical_i0_size(m.n());
        let i0 = sample_i(&j, size, rng)?;
        Self::new(m, j, u, i0)
    }

    pub fn matrix(&self) -> &RegularDigraph {
        &self.m
    }

    pub fn j(&self) -> &[usize] {
        &self.j
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn i0(&self) -> &[usize] {
        &self.i0
    }

    /// `I0 + {u}`, sorted.
    pub fn free_rows(&self) -> Vec<usize> {
        let mut t = self.i0.clone();
        t.push(self.u);
        t.sort_unstable();
        t
    }
}

/// Uniform `size`-subset of `j`, sorted.
pub fn sample_i<R: Rng + ?Sized>(j: &[usize], size: usize, rng: &mut R) -> Result<Vec<usize>> {
    if size > j.len() {
        return Err(invalid(format!("cannot draw {size} indices from {}", j.len())));
    }
    let mut out: Vec<usize> = index::sample(rng, j.len(), size).into_iter().map(|k| j[k]).collect();
    out.sort_unstable();
    Ok(out)
}

/// Union of the supports of the rows in `t`, sorted.
pub fn support_union(m: &RegularDigraph, t: &[usize]) -> Vec<usize> {
    let mut s: Vec<usize> = t.iter().flat_map(|&i| m.row_support(i).iter().copied()).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Whether the rows in `t` have pairwise disjoint supports.
pub fn supports_disjoint(m: &RegularDigraph, t: &[usize]) -> bool {
    let mut rows = t.to_vec();
    rows.sort_unstable();
    rows.dedup();
    support_union(m, &rows).len() == rows.len() * m.d()
}

/// Frequency with which `I0 + {u}` has pairwise disjoint supports, with
/// `I0` a uniform subset of `J` of the canonical size.
pub fn disjointness_frequency(
    m: &RegularDigraph,
    j: &[usize],
    u: usize,
    trials: usize,
    seed: u64,
) -> Result<FrequencyEstimate> {
    let size = canonical_i0_size(m.n());
    let mut hits = 0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let mut rows = sample_i(j, size, &mut rng)?;
        rows.push(u);
        if supports_disjoint(m, &rows) {
            hits += 1;
        }
    }
    Ok(FrequencyEstimate::new(hits, trials))
}

/// Exact law of `X`: each possible support of row `u` with the number of
/// matrices in `M(M, T)` realising it.
pub fn x_distribution(spec: &ResamplerSpec) -> Result<BTreeMap<Vec<usize>, u64>> {
    let all = enumerate_restricted(&spec.m, &spec.free_rows())?;
    let mut counts = BTreeMap::new();
    for m in &all {
        *counts.entry(m.row_support(spec.u).to_vec()).or_insert(0) += 1;
    }
    Ok(counts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XSamplerOptions {
    /// Largest search-size estimate for which the exact sampler is used.
    pub exact_budget: f64,
    /// Chain proposals before the first draw; `None` means
    /// `max(1000, 50 |T| d)`.
    pub burn_in: Option<usize>,
    /// Chain proposals between draws; `None` means `max(10, 5 |T| d)`.
    pub thinning: Option<usize>,
}

impl Default for XSamplerOptions {
    fn default() -> Self {
        Self {
            exact_budget: 1e6,
            burn_in: None,
            thinning: None,
        }
    }
}

/// Repeated draws of `X`.
///
/// Small instances enumerate `M(M, T)` once and draw uniformly from it,
/// which is exact. Larger ones run the switch chain restricted to the rows
/// `T` (two distinct rows of `T`, a one in each, swapped when admissible),
/// which is approximate and labelled as such.
#[derive(Clone, Debug)]
pub struct XSampler {
    u_pos: usize,
    inner: XInner,
}

#[derive(Clone, Debug)]
enum XInner {
    Exact(Vec<Vec<usize>>),
    Chain {
        rows: Vec<Vec<usize>>,
        started: bool,
        burn_in: usize,
        thinning: usize,
    },
}

impl XSampler {
    pub fn new(spec: &ResamplerSpec, opts: &XSamplerOptions) -> Result<Self> {
        let t = spec.free_rows();
        let u_pos = t.iter().position(|&r| r == spec.u).expect("u is a free row");
        if t.len() == 1 || restricted_search_size(&spec.m, &t) <= opts.exact_budget {
            let all = enumerate_restricted(&spec.m, &t)?;
            let rows = all.iter().map(|m| m.row_support(spec.u).to_vec()).collect();
            return Ok(Self {
                u_pos,
                inner: XInner::Exact(rows),
            });
        }
        let work = t.len() * spec.m.d();
        Ok(Self {
            u_pos,
            inner: XInner::Chain {
                rows: t.iter().map(|&r| spec.m.row_support(r).to_vec()).collect(),
                started: false,
                burn_in: opts.burn_in.unwrap_or((50 * work).max(1000)),
                thinning: opts.thinning.unwrap_or((5 * work).max(10)),
            },
        })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.inner, XInner::Exact(_))
    }

    /// Support of the next draw, sorted.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<usize> {
        match &mut self.inner {
            XInner::Exact(rows) => rows[rng.random_range(0..rows.len())].clone(),
            XInner::Chain {
                rows,
                started,
                burn_in,
                thinning,
            } => {
                let steps = if *started { *thinning } else { *burn_in };
                *started = true;
                for _ in 0..steps {
                    restricted_switch(rows, rng);
                }
                rows[self.u_pos].clone()
            }
        }
    }
}

fn restricted_switch<R: Rng + ?Sized>(rows: &mut [Vec<usize>], rng: &mut R) -> bool {
    let k = rows.len();
    if k < 2 {
        return false;
    }
    let r1 = rng.random_range(0..k);
    let mut r2 = rng.random_range(0..k - 1);
    if r2 >= r1 {
        r2 += 1;
    }
    let p1 = rng.random_range(0..rows[r1].len());
    let p2 = rng.random_range(0..rows[r2].len());
    let (j1, j2) = (rows[r1][p1], rows[r2][p2]);
    if j1 == j2 || rows[r1].binary_search(&j2).is_ok() || rows[r2].binary_search(&j1).is_ok() {
        return false;
    }
    rows[r1].remove(p1);
    let at = rows[r1].binary_search(&j2).unwrap_err();
    rows[r1].insert(at, j2);
    rows[r2].remove(p2);
    let at = rows[r2].binary_search(&j1).unwrap_err();
    rows[r2].insert(at, j1);
    true
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XDraw {
    /// Sorted support of the sampled row.
    pub support: Vec<usize>,
    pub exact: bool,
}

impl XDraw {
    pub fn to_dense(&self, n: usize) -> Vec<u8> {
        let mut x = vec![0u8; n];
        for &j in &self.support {
            x[j] = 1;
        }
        x
    }
}

/// One draw of `X`; see [`XSampler`] for repeated draws.
pub fn sample_x<R: Rng + ?Sized>(spec: &ResamplerSpec, rng: &mut R, opts: &XSamplerOptions) -> Result<XDraw> {
    let mut s = XSampler::new(spec, opts)?;
    Ok(XDraw {
        support: s.sample(rng),
        exact: s.is_exact(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportCheck {
    /// Union of the supports of the free rows.
    pub s: Vec<usize>,
    /// `C(|S|, d)`.
    pub subsets: u64,
    /// Realising count for each support of row `u`.
    pub counts: Vec<(Vec<usize>, u64)>,
    /// Size of `M(M, T)`.
    pub total: u64,
    /// Whether the free rows have pairwise disjoint supports.
    pub hypothesis_holds: bool,
    /// Every `d`-subset of `S` is realised, all by the same count.
    pub equinumerous: bool,
}

/// Exact count of the matrices realising each support of row `u`.
pub fn uniform_support_check(spec: &ResamplerSpec) -> Result<SupportCheck> {
    let t = spec.free_rows();
    let s = support_union(&spec.m, &t);
    let dist = x_distribution(spec)?;
    let subsets = binomial(s.len(), spec.m.d()).round() as u64;
    let total = dist.values().sum();
    let first = dist.values().next().copied();
    let equinumerous = dist.len() as u64 == subsets
        && dist.keys().all(|k| k.iter().all(|j| s.binary_search(j).is_ok()))
        && dist.values().all(|&c| Some(c) == first);
    Ok(SupportCheck {
        hypothesis_holds: supports_disjoint(&spec.m, &t),
        s,
        subsets,
        counts: dist.into_iter().collect(),
        total,
        equinumerous,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingDraw {
    /// `xi_1, ..., xi_d`, i.i.d. uniform on `S`.
    pub xi: Vec<usize>,
    /// Distinct values of `xi`, sorted.
    pub support: Vec<usize>,
    pub collided: bool,
}

pub fn coupling_sampler<R: Rng + ?Sized>(s: &[usize], d: usize, rng: &mut R) -> Result<CouplingDraw> {
    if s.len() < d || s.is_empty() {
        return Err(invalid(format!(
            "need |S| >= d and S nonempty, got |S| = {}, d = {d}",
            s.len()
        )));
    }
    let xi: Vec<usize> = (0..d).map(|_| s[rng.random_range(0..s.len())]).collect();
    let mut support = xi.clone();
    support.sort_unstable();
    support.dedup();
    Ok(CouplingDraw {
        collided: support.len() < d,
        xi,
        support,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub collisions: FrequencyEstimate,
    /// `d^2 / |S|`.
    pub bound: f64,
}

/// Collision frequency of [`coupling_sampler`] on `S = {0, ..., s_size - 1}`.
pub fn coupling_experiment(s_size: usize, d: usize, trials: usize, seed: u64) -> Result<CouplingReport> {
    let s: Vec<usize> = (0..s_size).collect();
    let mut rng = trial_rng(seed, 0);
    let mut hits = 0;
    for _ in 0..trials {
        if coupling_sampler(&s, d, &mut rng)?.collided {
            hits += 1;
        }
    }
    Ok(CouplingReport {
        collisions: FrequencyEstimate::new(hits, trials),
        bound: (d * d) as f64 / s_size as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    Holds,
    Violated,
    /// The candidate-center bounds straddle the threshold.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallBallParams {
    pub rho: f64,
    pub lambda: Complex64,
    /// Indices exempt from the level hypothesis.
    pub j_tilde: Vec<usize>,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallBallReport {
    pub hits: FrequencyEstimate,
    /// `(8 |J~| / n)^d + 144 delta + n^{-1/10}`.
    pub ceiling: f64,
    /// Whether every radius-`rho` level set of `y` outside `J~` has at
    /// most `delta n` elements.
    pub hypothesis: Hypothesis,
    pub exact_sampler: bool,
}

/// Frequency of `|<y, X> - lambda| <= rho / 4`, with `<y, X> = sum_j y_j X_j`.
pub fn smallball_experiment(
    y: &[Complex64],
    spec: &ResamplerSpec,
    params: &SmallBallParams,
    trials: usize,
    seed: u64,
    opts: &XSamplerOptions,
) -> Result<SmallBallReport> {
    let n = spec.m.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "y has length {}, expected {n}",
            y.len()
        )));
    }
    if !(params.rho > 0.0) || params.delta < 0.0 {
        return Err(invalid("need rho > 0 and delta >= 0"));
    }
    let rest: Vec<Complex64> = (0..n).filter(|j| !params.j_tilde.contains(j)).map(|j| y[j]).collect();
    let limit = params.delta * n as f64;
    let hypothesis = if rest.is_empty() {
        Hypothesis::Holds
    } else {
        let prof = level_count(&rest, params.rho)?;
        if prof.count_2rho as f64 <= limit {
            Hypothesis::Holds
        } else if prof.count as f64 > limit {
            Hypothesis::Violated
        } else {
            Hypothesis::Undecided
        }
    };
    let mut sampler = XSampler::new(spec, opts)?;
    let mut rng = trial_rng(seed, 0);
    let mut hits = 0;
    for _ in 0..trials {
        let supp = sampler.sample(&mut rng);
        let dot: Complex64 = supp.iter().map(|&j| y[j]).sum();
        if (dot - params.lambda).norm() <= params.rho / 4.0 {
            hits += 1;
        }
    }
    let nf = n as f64;
    Ok(SmallBallReport {
        hits: FrequencyEstimate::new(hits, trials),
        ceiling: (8.0 * params.j_tilde.len() as f64 / nf).powi(spec.m.d() as i32)
            + 144.0 * params.delta
            + nf.powf(-0.1),
        hypothesis,
        exact_sampler: sampler.is_exact(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceRecord {
    pub trial: usize,
    pub seed: u64,
    /// 1-based position in the random row order.
    pub i: usize,
    pub distance: f64,
    /// `exp(-C (n / (n - i))^gamma)`; 0 when `i = n`.
    pub threshold: f64,
    pub violated: bool,
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    pub c_const: f64,
    pub sample: SampleMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RowDistanceParams {
    pub c_const: f64,
    pub gamma: f64,
    pub sampler: SamplerOptions,
}

impl Default for RowDistanceParams {
    fn default() -> Self {
        Self {
            c_const: 1.0,
            gamma: 1.0 / 288.0,
            sampler: SamplerOptions::default(),
        }
    }
}

/// Per trial: sample `A`, a uniform row order `sigma`, and measure the
/// distance from row `sigma(i)` of `B_z` to the span of rows
/// `sigma(1), ..., sigma(i - 1)`.
pub fn row_distance_experiment(
    n: usize,
    d: usize,
    z: Complex64,
    i: usize,
    trials: usize,
    master_seed: u64,
    params: &RowDistanceParams,
) -> Result<Vec<DistanceRecord>> {
    if i == 0 || i > n {
        return Err(invalid(format!("row position {i} outside 1..={n}")));
    }
    let nf = n as f64;
    let threshold = if i == n {
        0.0
    } else {
        (-params.c_const * (nf / (n - i) as f64).powf(params.gamma)).exp()
    };
    let spec = ShiftSpec::normalized(z, d)?;
    (0..trials)
        .map(|t| {
            let seed = derive_seed(master_seed, t as u64);
            let mut rng = trial_rng(master_seed, t as u64);
            let (a, sample) = sample_uniform(n, d, &mut rng, &params.sampler)?;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let b = build_shifted(&a, &spec);
            let mut basis = OrthoBasis::empty(n);
            for &r in &order[..i - 1] {
                basis.push(b.row(r))?;
            }
            let distance = basis.distance(b.row(order[i - 1]))?;
            Ok(DistanceRecord {
                trial: t,
                seed,
                i,
                distance,
                threshold,
                violated: distance < threshold,
                n,
                d,
                gamma: params.gamma,
                c_const: params.c_const,
                sample,
            })
        })
        .collect()
}

/// `L = 1 / (2 sqrt(C delta))`.
pub fn default_l(c_const: f64, delta: f64) -> f64 {
    1.0 / (2.0 * (c_const * delta).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepTwoVerdict {
    /// Rows among the first `m` whose leave-one-out distance is below `rho`.
    pub violations: usize,
    /// `L delta m`.
    pub allowed: f64,
    pub premise: bool,
    /// `max(1, floor((1 - 2 L delta) m))`.
    pub k: usize,
    pub s_k: f64,
    /// `rho sqrt(L delta)`.
    pub bound: f64,
    pub conclusion: bool,
    /// `premise => conclusion`.
    pub implication_holds: bool,
}

/// Checks one instance of the deterministic step behind
/// `P{s_{(1-2L delta)m}(B) >= rho sqrt(L delta)} >= 1 - 1/L`: if at most
/// `L delta m` of the first `m` rows are within `rho` of the span of the
/// other `m - 1`, then `s_k(B) >= rho sqrt(L delta)`.
///
/// `distances` are the leave-one-out distances of the first `m` rows and
/// `svals` the singular values of `B`, nonincreasing.
pub fn sv_from_distances(
    rho: f64,
    delta: f64,
    l: f64,
    m: usize,
    distances: &[f64],
    svals: &[f64],
) -> Result<StepTwoVerdict> {
    if !(rho > 0.0) || !(delta > 0.0) {
        return Err(invalid(format!("need rho > 0 and delta > 0, got {rho}, {delta}")));
    }
    if !(l >= 1.0 && l <= 1.0 / (2.0 * delta)) {
        return Err(invalid(format!(
            "need 1 <= L <= 1/(2 delta), got L = {l}, delta = {delta}"
        )));
    }
    if m == 0 || distances.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} distances for m = {m}",
            distances.len()
        )));
    }
    let mf = m as f64;
    let k = ((1.0 - 2.0 * l * delta) * mf).floor().max(1.0) as usize;
    if svals.len() < k {
        return Err(Error::DimensionMismatch(format!(
            "{} singular values, need {k}",
            svals.len()
        )));
    }
    let violations = distances.iter().filter(|&&t| t < rho).count();
    let allowed = l * delta * mf;
    let premise = violations as f64 <= allowed;
    let s_k = svals[k - 1];
    let bound = rho * (l * delta).sqrt();
    let conclusion = s_k >= bound;
    Ok(StepTwoVerdict {
        violations,
        allowed,
        premise,
        k,
        s_k,
        bound,
        conclusion,
        implication_holds: !premise || conclusion,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondMoment {
    /// `sum_j s_j^{-2}`.
    pub singular_side: f64,
    /// `sum_i dist_i^{-2}`.
    pub distance_side: f64,
}

impl SecondMoment {
    pub fn relative_gap(&self) -> f64 {
        (self.singular_side - self.distance_side).abs() / self.singular_side.abs().max(self.distance_side.abs())
    }
}

/// Both sides of `sum_j s_j^{-2} = sum_i dist(R_i, span_{k != i} R_k)^{-2}`
/// for a square matrix of full rank.
pub fn negative_second_moment(b: &ComplexDenseMatrix) -> Result<SecondMoment> {
    if !b.is_square() {
        return Err(invalid("negative second moment needs a square matrix"));
    }
    let s = singular_values(b)?;
    let dist = leave_one_out_distances(b)?;
    Ok(SecondMoment {
        singular_side: s.iter().map(|x| x.powi(-2)).sum(),
        distance_side: dist.iter().map(|x| x.powi(-2)).sum(),
    })
}
