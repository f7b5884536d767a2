mod common;

use std::collections::HashMap;

use circlaw_core::linalg::OrthoBasis;
use circlaw_core::normals::{
    build_clusters, build_clusters_among, classify_normal, level_count, order_statistics, orderstat_experiments,
    pair_sigma, plane_partition_cell, random_normal, sample_gaussian, strongly_correlated, OrderStatGrid, PlaneCell,
    StructureLabel, StructureParams, LAYER_OFFSETS,
};
use circlaw_core::rng::{rng_from_seed, trial_rng};
use circlaw_core::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit(n: usize, i: usize) -> Vec<Complex64> {
    (0..n).map(|k| c((k == i) as u8 as f64, 0.0)).collect()
}

fn random_basis(n: usize, k: usize, seed: u64) -> OrthoBasis {
    let mut rng = rng_from_seed(seed);
    let rows: Vec<Vec<Complex64>> = (0..k).map(|_| sample_gaussian(n, &mut rng).coords).collect();
    OrthoBasis::from_rows(n, &rows).unwrap()
}

#[test]
fn gaussian_modulus_law() {
    let mut rng = rng_from_seed(8);
    let draws = 1_000_000;
    let ts = [0.5, 1.0, 2.0];
    let mut hits = [0usize; 3];
    let mut second_moment = 0.0;
    for _ in 0..draws {
        let g = sample_gaussian(1, &mut rng).coords[0];
        let r = g.norm();
        second_moment += r * r;
        for (h, &t) in hits.iter_mut().zip(&ts) {
            if r <= t {
                *h += 1;
            }
        }
    }
    assert!((second_moment / draws as f64 - 1.0).abs() < 0.005);
    for (h, &t) in hits.iter().zip(&ts) {
        let emp = *h as f64 / draws as f64;
        let exact = 1.0 - (-t * t).exp();
        assert!((emp - exact).abs() < 3e-3, "t = {t}: {emp} vs {exact}");
    }
}

#[test]
fn coordinate_normal_keeps_a_gaussian_block() {
    let (n, k) = (6, 2);
    let rows: Vec<Vec<Complex64>> = (0..k).map(|i| unit(n, i)).collect();
    let basis = OrthoBasis::from_rows(n, &rows).unwrap();
    let mut rng = rng_from_seed(1);
    let trials = 100_000;
    let mut energy = 0.0;
    for _ in 0..trials {
        let y = random_normal(&basis, &sample_gaussian(n, &mut rng)).unwrap();
        assert!(y[..k].iter().all(|v| v.norm() == 0.0));
        energy += y[k..].iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    let mean = energy / (trials * (n - k)) as f64;
    assert!((mean - 1.0).abs() < 0.01, "{mean}");
}

#[test]
fn random_normal_is_orthogonal_to_span() {
    let n = 30;
    let mut rng = rng_from_seed(2);
    let rows: Vec<Vec<Complex64>> = (0..12).map(|_| sample_gaussian(n, &mut rng).coords).collect();
    let basis = OrthoBasis::from_rows(n, &rows).unwrap();
    let y = random_normal(&basis, &sample_gaussian(n, &mut rng)).unwrap();
    for r in &rows {
        let dot: Complex64 = r.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        assert!(dot.norm() < 1e-10);
    }
}

#[test]
fn pair_sigma_matches_monte_carlo_tail() {
    let n = 8;
    let basis = random_basis(n, 3, 40);
    let (i, j) = (1, 6);
    let sigma = pair_sigma(&basis, i, j).unwrap();
    assert_eq!(sigma, pair_sigma(&basis, j, i).unwrap());
    let alpha = 0.8 * sigma;
    let exact = (-(alpha * alpha) / (sigma * sigma)).exp();
    let mut rng = rng_from_seed(41);
    let trials = 100_000;
    let hits = (0..trials)
        .filter(|_| {
            let y = random_normal(&basis, &sample_gaussian(n, &mut rng)).unwrap();
            (y[i] - y[j]).norm() >= alpha
        })
        .count();
    let emp = hits as f64 / trials as f64;
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((emp - exact).abs() <= 3.0 * se, "{emp} vs {exact} (se {se})");
}

/// Greedy clusters by exhaustive search over every anchor and subset of the
/// remaining indices, ordered by size, then anchor, then the set itself.
fn brute_force_clusters(n: usize, corr: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let r = remaining.len();
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        for mask in 1u32..(1 << r) {
            let set: Vec<usize> = (0..r).filter(|b| mask >> b & 1 == 1).map(|b| remaining[b]).collect();
            for &u in &set {
                if !set.iter().all(|&v| v == u || corr(u, v)) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((size, anchor, s)) => {
                        set.len() > *size || (set.len() == *size && (u < *anchor || (u == *anchor && set < *s)))
                    }
                };
                if better {
                    best = Some((set.len(), u, set.clone()));
                }
            }
        }
        let (_, _, set) = best.unwrap();
        remaining.retain(|i| !set.contains(i));
        out.push(set);
    }
    out
}

#[test]
fn planted_blocks_are_recovered() {
    let n = 6;
    let diff = |a: usize, b: usize| {
        let mut v = unit(n, a);
        v[b] = c(-1.0, 0.0);
        v
    };
    let basis = OrthoBasis::from_rows(n, &[diff(0, 1), diff(1, 2), diff(3, 4), diff(4, 5)]).unwrap();
    let cl = build_clusters(&basis, 0.1, 0.5).unwrap();
    assert_eq!(cl.clusters, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    assert_eq!(cl.anchors, vec![0, 3]);
}

#[test]
fn clusters_match_exhaustive_search() {
    let n = 6;
    let mut rng = rng_from_seed(77);
    for trial in 0..40 {
        let basis = random_basis(n, rng.random_range(0..n), 100 + trial);
        let sig: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { pair_sigma(&basis, i, j).unwrap() })
                    .collect()
            })
            .collect();
        // Put the threshold between two middle sigmas so that roughly half the
        // pairs correlate and no pair sits on the boundary.
        let mut all: Vec<f64> = sig.iter().flatten().copied().filter(|&s| s > 1e-12).collect();
        all.sort_by(f64::total_cmp);
        all.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let beta: f64 = 0.3;
        let mid = match all.len() {
            0 => 1.0,
            1 => all[0] * 1.5,
            l => 0.5 * (all[l / 2 - 1] + all[l / 2]),
        };
        let alpha = mid * (1.0 / beta).ln().sqrt();
        let cl = build_clusters(&basis, alpha, beta).unwrap();
        let oracle = brute_force_clusters(n, &|u, v| strongly_correlated(sig[u][v], alpha, beta));
        assert_eq!(cl.clusters, oracle, "trial {trial}");
    }
}

#[test]
fn rerunning_on_the_rest_continues_the_sequence() {
    let n = 12;
    let basis = random_basis(n, 7, 5);
    let cl = build_clusters(&basis, 0.6, 0.4).unwrap();
    let sizes: Vec<usize> = cl.clusters.iter().map(Vec::len).collect();
    assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
    let mut seen = vec![false; n];
    for (u, set) in cl.anchors.iter().zip(&cl.clusters) {
        assert!(set.contains(u));
        for &v in set {
            assert!(!seen[v]);
            seen[v] = true;
            assert!(v == *u || strongly_correlated(pair_sigma(&basis, *u, v).unwrap(), 0.6, 0.4));
        }
    }
    for l in 1..cl.clusters.len() {
        let rest: Vec<usize> = (0..n)
            .filter(|i| !cl.clusters[..l].iter().flatten().any(|x| x == i))
            .collect();
        let again = build_clusters_among(&basis, &rest, 0.6, 0.4).unwrap();
        assert_eq!(again.clusters[0], cl.clusters[l]);
        assert_eq!(again, build_clusters_among(&basis, &rest, 0.6, 0.4).unwrap());
    }
}

/// Every ball, in layer order, that contains `w`, by scanning a window of
/// centers.
fn containing_cells(w: Complex64, rho: f64) -> Vec<PlaneCell> {
    let (x, y) = (w.re / rho, w.im / rho);
    let mut out = Vec::new();
    for (l, &(ax, ay)) in LAYER_OFFSETS.iter().enumerate() {
        let (jx0, jy0) = ((x / 3.0).floor() as i64, (y / 3.0).floor() as i64);
        for jx in jx0 - 2..=jx0 + 2 {
            for jy in jy0 - 2..=jy0 + 2 {
                let dx = x - (ax + 3 * jx) as f64;
                let dy = y - (ay + 3 * jy) as f64;
                if dx * dx + dy * dy < 1.0 {
                    out.push(PlaneCell::Covered {
                        layer: l as u8 + 1,
                        j: (jx, jy),
                    });
                }
            }
        }
    }
    out
}

#[test]
fn plane_partition_properties() {
    for (k, rho) in [0.1, 1.0, 7.3].into_iter().enumerate() {
        let mut rng = rng_from_seed(500 + k as u64);
        let span = 20.0 * rho;
        let pts: Vec<Complex64> = (0..100_000)
            .map(|_| c(rng.random_range(-span..span), rng.random_range(-span..span)))
            .collect();
        let mut by_cell: HashMap<PlaneCell, Vec<Complex64>> = HashMap::new();
        for &p in &pts {
            let cell = plane_partition_cell(p, rho).unwrap();
            let owners = containing_cells(p, rho);
            // Covered, and by the first containing ball only.
            assert!(!owners.is_empty());
            assert_eq!(cell, owners[0]);
            let center = cell.center(rho).unwrap();
            assert!((p - center).norm() <= rho * (1.0 + 1e-12));
            by_cell.entry(cell).or_default().push(p);
        }
        // Same-layer cells more than one step apart have centers >= 6 rho
        // apart, so only neighbouring cells need a pairwise check.
        for (cell, members) in &by_cell {
            let PlaneCell::Covered { layer, j } = *cell else {
                unreachable!()
            };
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if (dx, dy) == (0, 0) {
                        continue;
                    }
                    let other = PlaneCell::Covered {
                        layer,
                        j: (j.0 + dx, j.1 + dy),
                    };
                    let Some(others) = by_cell.get(&other) else { continue };
                    for a in members {
                        for b in others {
                            assert!((a - b).norm() >= rho * (1.0 - 1e-12));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn sloping_profile_is_recognised() {
    let n = 40;
    let nf = n as f64;
    let x: Vec<Complex64> = (1..=n)
        .map(|i| Complex64::from_polar(nf.powi(3) / (i as f64).powi(3), i as f64))
        .collect();
    let label = classify_normal(&x, 10, &StructureParams::default()).unwrap();
    assert!(matches!(label, StructureLabel::SlopingManyLevels { .. }), "{label:?}");
}

#[test]
fn level_profile_brackets_the_true_maximum() {
    let mut rng = rng_from_seed(3);
    for _ in 0..20 {
        let x: Vec<Complex64> = (0..60)
            .map(|_| c(rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)))
            .collect();
        let rho = 0.5;
        let p = level_count(&x, rho).unwrap();
        // Grid search for a lower bound on the true maximum over lambda.
        let mut best = 0;
        for gx in 0..=80 {
            for gy in 0..=80 {
                let l = c(gx as f64 * 0.05, gy as f64 * 0.05);
                best = best.max(x.iter().filter(|&&v| (v - l).norm() <= rho).count());
            }
        }
        assert!(p.count <= p.count_2rho);
        assert!(best <= p.count_2rho, "grid {best} above upper {}", p.count_2rho);
    }
}

#[test]
fn min_order_statistic_has_the_exact_law() {
    // E = {0}: Y = G, and P{Y*_i <= tau} is a binomial tail in the
    // per-coordinate probability 1 - exp(-tau^2).
    let n = 20;
    let basis = OrthoBasis::empty(n);
    let grid = OrderStatGrid {
        small_c: vec![0.5, 1.0],
        large_c: vec![],
        indices: vec![],
    };
    let trials = 20_000;
    let recs = orderstat_experiments(&basis, trials, 9, &grid).unwrap();
    for r in &recs {
        let i = r.params["index"].as_u64().unwrap() as usize;
        let tau = i as f64 / n as f64;
        let p = 1.0 - (-tau * tau).exp();
        // At least n - i + 1 of the n moduli fall at or below tau.
        let exact: f64 = (n - i + 1..=n)
            .map(|k| binom(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
            .sum();
        let se = (exact * (1.0 - exact) / trials as f64).sqrt().max(1.0 / trials as f64);
        assert!(
            (r.empirical_freq - exact).abs() <= 4.0 * se,
            "i = {i}: {} vs {exact}",
            r.empirical_freq
        );
    }
    // The smallest modulus has P{Y*_n >= t} = exp(-n t^2).
    let mut rng = trial_rng(10, 0);
    let t = 0.1;
    let hits = (0..trials)
        .filter(|_| *order_statistics(&sample_gaussian(n, &mut rng).coords).last().unwrap() >= t)
        .count();
    let exact = (-(n as f64) * t * t).exp();
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((hits as f64 / trials as f64 - exact).abs() <= 4.0 * se);
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

#[test]
fn calibrated_orderstat_bounds_hold() {
    let n = 200;
    let basis = random_basis(n, 100, 12);
    let grid = OrderStatGrid {
        small_c: vec![0.05, 0.1],
        large_c: vec![2.0, 3.0],
        indices: vec![1, 2, 5, 10],
    };
    for r in orderstat_experiments(&basis, 200, 13, &grid).unwrap() {
        assert!(r.empirical_freq <= r.bound_value + 3.0 * r.stderr, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_statistics_match_a_naive_sort(v in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 0..50)) {
        let x: Vec<Complex64> = v.iter().map(|&(a, b)| c(a, b)).collect();
        let fast = order_statistics(&x);
        let mut naive: Vec<f64> = Vec::new();
        let mut pool: Vec<f64> = x.iter().map(|z| z.norm()).collect();
        while !pool.is_empty() {
            let k = (0..pool.len()).max_by(|&a, &b| pool[a].total_cmp(&pool[b])).unwrap();
            naive.push(pool.remove(k));
        }
        prop_assert_eq!(fast, naive);
    }

    #[test]
    fn pair_sigma_is_symmetric(seed in any::<u64>(), k in 0usize..8, i in 0usize..8, j in 0usize..8) {
        prop_assume!(i != j);
        let basis = random_basis(8, k, seed);
        prop_assert_eq!(pair_sigma(&basis, i, j).unwrap(), pair_sigma(&basis, j, i).unwrap());
    }
}
