//! Complex Gaussian vectors and uniform random normals `Y = P_{E^perp} G`.

mod clusters;
mod partition;
mod structure;

pub use clusters::{build_clusters, build_clusters_among, pair_sigma, strongly_correlated, CorrelationClusters};
pub use partition::{partition_points, plane_partition_cell, PlaneCell, LAYER_OFFSETS};
pub use structure::{classify_normal, level_count, LevelProfile, StructureLabel, StructureParams};

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::json;

use crate::error::{invalid, Result};
use crate::linalg::OrthoBasis;
use crate::record::{FrequencyEstimate, LemmaRecord};
use crate::rng::trial_rng;
use crate::Complex64;

/// Coordinates `xi_1 + i xi_2` with independent `xi_1, xi_2 ~ N(0, 1/2)`,
/// so `E|g|^2 = 1` and `P{|g| <= t} = 1 - exp(-t^2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexGaussianVector {
    pub coords: Vec<Complex64>,
}

pub fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn sample_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexGaussianVector {
    ComplexGaussianVector {
        coords: (0..n).map(|_| standard_complex_gaussian(rng)).collect(),
    }
}

/// `P_{E^perp} g` for `E` spanned by `basis`.
pub fn random_normal(basis: &OrthoBasis, g: &ComplexGaussianVector) -> Result<Vec<Complex64>> {
    basis.project_complement(&g.coords)
}

/// Moduli in nonincreasing order.
pub fn order_statistics(x: &[Complex64]) -> Vec<f64> {
    let mut m: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m
}

/// Constants scanned by [`orderstat_experiments`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderStatGrid {
    /// `c` in `P{Y*_{cm} <= cm/n} <= exp(-cm)`.
    pub small_c: Vec<f64>,
    /// `C` in `P{Y*_i >= C sqrt(ln(n/i))} <= (i/n)^i`.
    pub large_c: Vec<f64>,
    /// Indices `i <= n/2` for the large-deviation event.
    pub indices: Vec<usize>,
}

impl Default for OrderStatGrid {
    fn default() -> Self {
        Self {
            small_c: vec![0.01, 0.02, 0.05, 0.1],
            large_c: vec![1.0, 1.5, 2.0, 3.0],
            indices: vec![1, 2, 5, 10],
        }
    }
}

/// Monte Carlo frequencies of the small-ball and large-deviation events for
/// the order statistics of `Y`, one record per grid point.
///
/// Grid points whose index falls outside `1..=m` (small ball) or
/// `1..=n/2` (large deviations) are skipped.
pub fn orderstat_experiments(
    basis: &OrthoBasis,
    trials: usize,
    seed: u64,
    grid: &OrderStatGrid,
) -> Result<Vec<LemmaRecord>> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let n = basis.dim();
    let m = n - basis.rank();
    let nf = n as f64;
    let small: Vec<(f64, usize)> = grid
        .small_c
        .iter()
        .map(|&c| (c, (c * m as f64).floor() as usize))
        .filter(|&(_, i)| i >= 1 && i <= m)
        .collect();
    let large: Vec<(f64, usize)> = grid
        .large_c
        .iter()
        .flat_map(|&c| grid.indices.iter().map(move |&i| (c, i)))
        .filter(|&(_, i)| i >= 1 && 2 * i <= n)
        .collect();
    let mut small_hits = vec![0usize; small.len()];
    let mut large_hits = vec![0usize; large.len()];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let y = random_normal(basis, &sample_gaussian(n, &mut rng))?;
        let stats = order_statistics(&y);
        for (h, &(_, i)) in small_hits.iter_mut().zip(&small) {
            if stats[i - 1] <= i as f64 / nf {
                *h += 1;
            }
        }
        for (h, &(c, i)) in large_hits.iter_mut().zip(&large) {
            if stats[i - 1] >= c * (nf / i as f64).ln().sqrt() {
                *h += 1;
            }
        }
    }
    let mut out = Vec::new();
    for (&(c, i), &h) in small.iter().zip(&small_hits) {
        let est = FrequencyEstimate::new(h, trials);
        out.push(LemmaRecord {
            lemma_id: "orderstat-small-ball".into(),
            params: json!({"n": n, "m": m, "c": c, "index": i, "threshold": i as f64 / nf}),
            empirical_freq: est.freq,
            bound_value: (-(i as f64)).exp(),
            n_trials: trials,
            stderr: est.stderr,
        });
    }
    for (&(c, i), &h) in large.iter().zip(&large_hits) {
        let est = FrequencyEstimate::new(h, trials);
        out.push(LemmaRecord {
            lemma_id: "orderstat-large-deviation".into(),
            params: json!({"n": n, "m": m, "C": c, "index": i, "threshold": c * (nf / i as f64).ln().sqrt()}),
            empirical_freq: est.freq,
            bound_value: (i as f64 / nf).powi(i as i32),
            n_trials: trials,
            stderr: est.stderr,
        });
    }
    Ok(out)
}
