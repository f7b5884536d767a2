mod common;

use std::collections::BTreeMap;

use circlaw_core::anticonc::{
    coupling_experiment, coupling_sampler, default_l, disjointness_frequency, negative_second_moment,
    row_distance_experiment, sample_i, smallball_experiment, sv_from_distances, uniform_support_check, x_distribution,
    Hypothesis, ResamplerSpec, RowDistanceParams, SmallBallParams, XSampler, XSamplerOptions,
};
use circlaw_core::digraph::RegularDigraph;
use circlaw_core::linalg::{leave_one_out_distances, singular_values, ComplexDenseMatrix};
use circlaw_core::rng::rng_from_seed;
use circlaw_core::Complex64;
use common::{chi_square_pvalue, chi_square_uniform_pvalue, gaussian_matrix};
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn sample_i_is_uniform_over_subsets() {
    let j: Vec<usize> = (0..16).step_by(2).collect();
    let mut rng = rng_from_seed(11);
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..100_000 {
        let s = sample_i(&j, 2, &mut rng).unwrap();
        assert!(s[0] < s[1] && s.iter().all(|x| j.contains(x)));
        *counts.entry(s).or_default() += 1;
    }
    assert_eq!(counts.len(), 28);
    let p = chi_square_uniform_pvalue(&counts.values().copied().collect::<Vec<_>>());
    assert!(p >= 1e-3, "p = {p}");
}

#[test]
fn disjointness_matches_the_exact_probability() {
    // Circulant rows {0,1},{1,2},{2,3},{3,0}; with u = 2 only I0 = {0}
    // gives disjoint supports, so the probability is exactly 1/2.
    let m = RegularDigraph::circulant(4, 2).unwrap();
    let trials = 10_000;
    let est = disjointness_frequency(&m, &[0, 1], 2, trials, 3).unwrap();
    assert!((est.freq - 0.5).abs() <= 4.0 * 0.5 / (trials as f64).sqrt());
}

fn check_sampler_law(spec: &ResamplerSpec, opts: &XSamplerOptions, draws: usize, seed: u64) -> (bool, f64) {
    let law = x_distribution(spec).unwrap();
    let total: u64 = law.values().sum();
    let mut sampler = XSampler::new(spec, opts).unwrap();
    let mut rng = rng_from_seed(seed);
    let mut counts: BTreeMap<Vec<usize>, usize> = law.keys().map(|k| (k.clone(), 0)).collect();
    for _ in 0..draws {
        *counts
            .get_mut(&sampler.sample(&mut rng))
            .expect("support outside the exact law") += 1;
    }
    let observed: Vec<usize> = counts.values().copied().collect();
    let expected: Vec<f64> = law.values().map(|&w| w as f64 / total as f64 * draws as f64).collect();
    (sampler.is_exact(), chi_square_pvalue(&observed, &expected))
}

#[test]
fn x_sampler_matches_enumeration() {
    let m = RegularDigraph::circulant(6, 2).unwrap();
    let spec = ResamplerSpec::new(m, vec![0, 1, 2], 3, vec![1, 2]).unwrap();
    let law = x_distribution(&spec).unwrap();
    assert!(law.len() > 1);
    let (exact, p) = check_sampler_law(&spec, &XSamplerOptions::default(), 50_000, 1);
    assert!(exact && p >= 1e-3, "exact sampler p = {p}");
    let chain = XSamplerOptions {
        exact_budget: 0.0,
        ..XSamplerOptions::default()
    };
    let (exact, p) = check_sampler_law(&spec, &chain, 20_000, 2);
    assert!(!exact && p >= 1e-3, "chain p = {p}");
}

#[test]
fn x_sampler_on_4_2() {
    let m = RegularDigraph::circulant(4, 2).unwrap();
    let spec = ResamplerSpec::new(m, vec![0, 1], 2, vec![1]).unwrap();
    let (exact, p) = check_sampler_law(&spec, &XSamplerOptions::default(), 20_000, 4);
    assert!(exact && p >= 1e-3);
}

#[test]
fn support_check_on_disjoint_instances() {
    // n = 4, d = 1: rows 0 and 2 of the identity, S = {0, 2}.
    let spec = ResamplerSpec::new(RegularDigraph::identity(4).unwrap(), vec![0, 1], 2, vec![0]).unwrap();
    let chk = uniform_support_check(&spec).unwrap();
    assert!(chk.hypothesis_holds && chk.equinumerous);
    assert_eq!(chk.s, vec![0, 2]);
    assert_eq!(chk.counts, vec![(vec![0], 1), (vec![2], 1)]);

    // n = 6, d = 2: rows {0,1}, {2,3}, {4,5} tile S = [6]. Each 2-subset
    // for row u leaves 4!/(2! 2!) = 6 completions.
    let m = RegularDigraph::circulant(6, 2).unwrap();
    let spec = ResamplerSpec::new(m, vec![0, 1, 2], 4, vec![0, 2]).unwrap();
    let chk = uniform_support_check(&spec).unwrap();
    assert!(chk.hypothesis_holds && chk.equinumerous);
    assert_eq!(chk.subsets, 15);
    assert_eq!(chk.total, 90);
    assert!(chk.counts.iter().all(|(_, k)| *k == 6));
}

#[test]
fn support_check_detects_overlap() {
    let m = RegularDigraph::circulant(4, 2).unwrap();
    let spec = ResamplerSpec::new(m, vec![0, 1], 2, vec![1]).unwrap();
    let chk = uniform_support_check(&spec).unwrap();
    assert!(!chk.hypothesis_holds && !chk.equinumerous);
    assert_eq!(chk.counts, vec![(vec![1, 2], 1), (vec![2, 3], 1)]);
}

#[test]
fn coupling_collisions_follow_the_birthday_law() {
    let (s, d, trials) = (64, 4, 100_000);
    let rep = coupling_experiment(s, d, trials, 21).unwrap();
    assert!(rep.collisions.within(rep.bound, 3.0));
    let exact = 1.0 - (0..d).map(|k| 1.0 - k as f64 / s as f64).product::<f64>();
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((rep.collisions.freq - exact).abs() <= 4.0 * se);
}

#[test]
fn coupling_without_collision_is_uniform() {
    let s: Vec<usize> = (0..8).collect();
    let mut rng = rng_from_seed(22);
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..100_000 {
        let draw = coupling_sampler(&s, 3, &mut rng).unwrap();
        if !draw.collided {
            assert_eq!(draw.support.len(), 3);
            *counts.entry(draw.support).or_default() += 1;
        }
    }
    assert_eq!(counts.len(), 56);
    assert!(chi_square_uniform_pvalue(&counts.values().copied().collect::<Vec<_>>()) >= 1e-3);
}

#[test]
fn smallball_degenerate_vectors() {
    let m = RegularDigraph::circulant(6, 2).unwrap();
    let spec = ResamplerSpec::new(m, vec![0, 1, 2], 4, vec![0, 2]).unwrap();
    let opts = XSamplerOptions::default();

    let zero = vec![c(0.0, 0.0); 6];
    let p = SmallBallParams {
        rho: 1.0,
        lambda: c(0.0, 0.0),
        j_tilde: vec![],
        delta: 0.5,
    };
    let rep = smallball_experiment(&zero, &spec, &p, 200, 1, &opts).unwrap();
    assert_eq!(rep.hits.hits, 200);
    assert_eq!(rep.hypothesis, Hypothesis::Violated);
    assert!(rep.exact_sampler);

    let spread: Vec<Complex64> = (0..6).map(|j| c(10.0 * j as f64, 0.0)).collect();
    let p = SmallBallParams {
        rho: 1.0,
        lambda: c(-100.0, 0.0),
        j_tilde: vec![],
        delta: 1.0 / 6.0,
    };
    let rep = smallball_experiment(&spread, &spec, &p, 200, 1, &opts).unwrap();
    assert_eq!(rep.hits.hits, 0);
    assert_eq!(rep.hypothesis, Hypothesis::Holds);

    // Exempting every index leaves nothing to test.
    let p = SmallBallParams {
        rho: 1.0,
        lambda: c(0.0, 0.0),
        j_tilde: (0..6).collect(),
        delta: 0.0,
    };
    assert_eq!(
        smallball_experiment(&zero, &spec, &p, 10, 1, &opts).unwrap().hypothesis,
        Hypothesis::Holds
    );
    assert!(smallball_experiment(&zero[..5], &spec, &p, 10, 1, &opts).is_err());
}

#[test]
fn first_row_distance_is_the_row_norm() {
    let params = RowDistanceParams::default();
    // At z = 0 every row of A / sqrt(d) has unit norm.
    for r in row_distance_experiment(40, 4, c(0.0, 0.0), 1, 10, 7, &params).unwrap() {
        assert!((r.distance - 1.0).abs() < 1e-12);
    }
    // At z = 1/2 the norm depends only on the diagonal entry of the row.
    let d = 4.0f64;
    let off = (1.0f64 + 0.25).sqrt();
    let on = ((d - 1.0) / d + (1.0 / d.sqrt() - 0.5).powi(2)).sqrt();
    for r in row_distance_experiment(40, 4, c(0.5, 0.0), 1, 20, 8, &params).unwrap() {
        assert!(
            (r.distance - off).abs() < 1e-12 || (r.distance - on).abs() < 1e-12,
            "{}",
            r.distance
        );
    }
    let last = row_distance_experiment(40, 4, c(0.5, 0.0), 40, 3, 9, &params).unwrap();
    assert!(last.iter().all(|r| r.threshold == 0.0 && r.distance > 0.0));
}

#[test]
fn step_two_implication_on_gaussian_matrices() {
    let mut rng = rng_from_seed(31);
    let n = 30;
    for t in 0..40 {
        let b = ComplexDenseMatrix::from_vec(n, n, gaussian_matrix(n, &mut rng)).unwrap();
        let dist = leave_one_out_distances(&b).unwrap();
        let s = singular_values(&b).unwrap();
        let delta = [0.02, 0.05, 0.1][t % 3];
        let l = rng.random_range(1.0..1.0 / (2.0 * delta));
        let mut sorted = dist.clone();
        sorted.sort_by(f64::total_cmp);
        // Largest rho the premise tolerates, and a larger one that breaks it.
        let allowed = (l * delta * n as f64).floor() as usize;
        for rho in [sorted[allowed], sorted[allowed] * 0.5, sorted[n - 1] * 2.0] {
            let v = sv_from_distances(rho, delta, l, n, &dist, &s).unwrap();
            assert!(v.implication_holds, "{v:?}");
        }
        let v = sv_from_distances(sorted[allowed], delta, l, n, &dist, &s).unwrap();
        assert!(v.premise);
    }
    assert!((default_l(1.0, 0.01) - 5.0).abs() < 1e-12);
}

#[test]
fn negative_second_moment_identity() {
    let mut rng = rng_from_seed(41);
    for _ in 0..50 {
        let b = ComplexDenseMatrix::from_vec(30, 30, gaussian_matrix(30, &mut rng)).unwrap();
        let sm = negative_second_moment(&b).unwrap();
        assert!(sm.relative_gap() <= 1e-6, "{sm:?}");
    }
    let diag = ComplexDenseMatrix::from_fn(5, 5, |i, j| if i == j { c((i + 1) as f64, 0.0) } else { c(0.0, 0.0) });
    let sm = negative_second_moment(&diag).unwrap();
    let exact: f64 = (1..=5).map(|k| 1.0 / (k * k) as f64).sum();
    assert!((sm.singular_side - exact).abs() < 1e-12 && (sm.distance_side - exact).abs() < 1e-12);
}
