//! Level counting and the steep/sloping dichotomy for normal vectors.

use serde::Serialize;

use super::order_statistics;
use crate::error::{invalid, Error, Result};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelProfile {
    pub rho: f64,
    /// Coordinate whose radius-`rho` ball holds the most coordinates.
    pub best_center: Complex64,
    /// `max_i |{k : |x_k - x_i| <= rho}|`, a lower bound on
    /// `max_lambda |{k : |x_k - lambda| <= rho}|`.
    pub count: usize,
    /// `max_i |{k : |x_k - x_i| <= 2 rho}|`, an upper bound on the same
    /// maximum: any ball of radius `rho` holding a coordinate `x_i` lies in
    /// the ball of radius `2 rho` around `x_i`.
    pub count_2rho: usize,
}

/// Candidate-center estimate of the largest level set of radius `rho`.
pub fn level_count(x: &[Complex64], rho: f64) -> Result<LevelProfile> {
    if !(rho > 0.0) {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    if x.is_empty() {
        return Err(invalid("level_count needs a nonempty vector"));
    }
    let (r1, r2) = (rho * rho, 4.0 * rho * rho);
    let mut best = (0usize, 0usize);
    let mut upper = 0usize;
    for (i, &c) in x.iter().enumerate() {
        let (mut k1, mut k2) = (0, 0);
        for &y in x {
            let d = (y - c).norm_sqr();
            if d <= r2 {
                k2 += 1;
                if d <= r1 {
                    k1 += 1;
                }
            }
        }
        if k1 > best.0 {
            best = (k1, i);
        }
        upper = upper.max(k2);
    }
    Ok(LevelProfile {
        rho,
        best_center: x[best.1],
        count: best.0,
        count_2rho: upper,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructureParams {
    pub a: f64,
    pub gamma: f64,
}

impl Default for StructureParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            gamma: 1.0 / 288.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "label", rename_all = "kebab-case")]
pub enum StructureLabel {
    /// `x*_index > 0.9 (n / index)^3 x*_k`.
    VerySteep { index: usize, ratio: f64 },
    /// Decay bound holds and every level set is small.
    SlopingManyLevels {
        decay_margin: f64,
        level_upper: usize,
        level_bound: f64,
    },
    /// Decay bound holds but a large level set exists (or could not be
    /// excluded, flagged by `undecided`).
    Neither {
        decay_margin: f64,
        level_lower: usize,
        level_upper: usize,
        level_bound: f64,
        undecided: bool,
    },
}

impl StructureLabel {
    pub fn name(&self) -> &'static str {
        match self {
            StructureLabel::VerySteep { .. } => "very-steep",
            StructureLabel::SlopingManyLevels { .. } => "sloping-many-levels",
            StructureLabel::Neither { .. } => "neither",
        }
    }
}

/// Classifies `x` with `|I^c| = ic_size`, using the pivot `k = floor(a |I^c|)`.
///
/// Very steep: some `i <= k` has `x*_i > 0.9 (n/i)^3 x*_k`. Otherwise the
/// level condition is tested at radius `exp(-2 (n/|I^c|)^gamma) x*_k`
/// against the bound `(|I^c|/n)^{gamma/2} n`: a `2 rho` count within the
/// bound certifies it, a `rho` count above the bound refutes it.
pub fn classify_normal(x: &[Complex64], ic_size: usize, params: &StructureParams) -> Result<StructureLabel> {
    let n = x.len();
    let k = (params.a * ic_size as f64).floor();
    if !(k >= 1.0 && k <= n as f64) {
        return Err(invalid(format!(
            "need 1 <= a |I^c| <= n, got a = {}, |I^c| = {ic_size}, n = {n}",
            params.a
        )));
    }
    let k = k as usize;
    let stats = order_statistics(x);
    if stats[0] == 0.0 {
        return Err(Error::ZeroVector);
    }
    let nf = n as f64;
    let pivot = stats[k - 1];
    let mut decay_margin = f64::INFINITY;
    for i in 1..=k {
        let cap = 0.9 * (nf / i as f64).powi(3) * pivot;
        if stats[i - 1] > cap {
            return Ok(StructureLabel::VerySteep {
                index: i,
                ratio: stats[i - 1] / pivot,
            });
        }
        decay_margin = decay_margin.min((cap / stats[i - 1]).ln());
    }
    let ratio = nf / ic_size as f64;
    let rho = (-2.0 * ratio.powf(params.gamma)).exp() * pivot;
    let level_bound = ratio.recip().powf(params.gamma / 2.0) * nf;
    let prof = level_count(x, rho)?;
    Ok(if prof.count_2rho as f64 <= level_bound {
        StructureLabel::SlopingManyLevels {
            decay_margin,
            level_upper: prof.count_2rho,
            level_bound,
        }
    } else {
        StructureLabel::Neither {
            decay_margin,
            level_lower: prof.count,
            level_upper: prof.count_2rho,
            level_bound,
            undecided: prof.count as f64 <= level_bound,
        }
    })
}
