//! Greedy clusters of strongly correlated coordinates of a random normal.
//!
//! For `Y = P_{E^perp} G`, the increment `Y_i - Y_j` is a complex Gaussian
//! with `E|Y_i - Y_j|^2 = sigma^2`, `sigma = ||P_{E^perp}(e_i - e_j)||`, so
//! `P{|Y_i - Y_j| >= alpha} = exp(-alpha^2 / sigma^2)` exactly. Correlation
//! is decided from `sigma` in closed form, never by sampling.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::OrthoBasis;
use crate::Complex64;

fn unit(n: usize, i: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[i] = Complex64::new(1.0, 0.0);
    e
}

/// Standard deviation of `Y_i - Y_j`.
pub fn pair_sigma(basis: &OrthoBasis, i: usize, j: usize) -> Result<f64> {
    let n = basis.dim();
    if i >= n || j >= n {
        return Err(invalid(format!("index out of range for dimension {n}")));
    }
    if i == j {
        return Err(invalid("pair_sigma needs two distinct indices"));
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let mut v = unit(n, lo);
    v[hi] = Complex64::new(-1.0, 0.0);
    basis.distance(&v)
}

/// `exp(-alpha^2 / sigma^2) <= beta`, with `sigma = 0` always correlated.
pub fn strongly_correlated(sigma: f64, alpha: f64, beta: f64) -> bool {
    sigma == 0.0 || (-(alpha * alpha) / (sigma * sigma)).exp() <= beta
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationClusters {
    /// Sorted index sets, by nonincreasing cardinality.
    pub clusters: Vec<Vec<usize>>,
    pub anchors: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
}

/// Matrix of `sigma_ij` over `candidates`, from the complement vectors
/// `c_i = P_{E^perp} e_i` via `sigma_ij = ||c_i - c_j||`.
fn sigma_table(basis: &OrthoBasis, candidates: &[usize]) -> Result<Vec<Vec<f64>>> {
    let n = basis.dim();
    let comp: Vec<Vec<Complex64>> = candidates
        .iter()
        .map(|&i| basis.project_complement(&unit(n, i)))
        .collect::<Result<_>>()?;
    let k = candidates.len();
    let mut table = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let s = comp[a]
                .iter()
                .zip(&comp[b])
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            table[a][b] = s;
            table[b][a] = s;
        }
    }
    Ok(table)
}

/// Greedy clusters over all of `[n]`.
pub fn build_clusters(basis: &OrthoBasis, alpha: f64, beta: f64) -> Result<CorrelationClusters> {
    let all: Vec<usize> = (0..basis.dim()).collect();
    build_clusters_among(basis, &all, alpha, beta)
}

/// Greedy clusters over the index set `candidates`.
///
/// Each round takes the anchor whose correlated neighbourhood among the
/// remaining indices is largest, preferring the smaller anchor index, and
/// removes that neighbourhood. For a fixed anchor the largest admissible
/// cluster is its whole neighbourhood, so the order is total.
pub fn build_clusters_among(
    basis: &OrthoBasis,
    candidates: &[usize],
    alpha: f64,
    beta: f64,
) -> Result<CorrelationClusters> {
    if !(alpha > 0.0) || !(beta > 0.0 && beta <= 0.5) {
        return Err(invalid(format!(
            "need alpha > 0 and beta in (0, 1/2], got {alpha}, {beta}"
        )));
    }
    let mut cand = candidates.to_vec();
    cand.sort_unstable();
    cand.dedup();
    if cand.iter().any(|&i| i >= basis.dim()) {
        return Err(invalid("candidate index out of range"));
    }
    let table = sigma_table(basis, &cand)?;
    let k = cand.len();
    let adj: Vec<Vec<bool>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| a == b || strongly_correlated(table[a][b], alpha, beta))
                .collect()
        })
        .collect();
    let mut alive = vec![true; k];
    let mut degree: Vec<usize> = (0..k).map(|a| adj[a].iter().filter(|&&x| x).count()).collect();
    let mut out = CorrelationClusters {
        clusters: Vec::new(),
        anchors: Vec::new(),
        alpha,
        beta,
    };
    for _ in 0..k {
        let Some(anchor) = (0..k)
            .filter(|&a| alive[a])
            .max_by(|&a, &b| degree[a].cmp(&degree[b]).then(b.cmp(&a)))
        else {
            break;
        };
        let members: Vec<usize> = (0..k).filter(|&b| alive[b] && adj[anchor][b]).collect();
        for &b in &members {
            alive[b] = false;
        }
        for a in 0..k {
            if alive[a] {
                degree[a] -= members.iter().filter(|&&b| adj[a][b]).count();
            }
        }
        out.anchors.push(cand[anchor]);
        out.clusters.push(members.iter().map(|&b| cand[b]).collect());
    }
    Ok(out)
}
