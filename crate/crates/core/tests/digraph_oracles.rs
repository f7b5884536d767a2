mod common;

use std::collections::HashMap;

use circlaw_core::digraph::{
    apply_switch, enumerate_all, enumerate_restricted, sample_configuration, sample_uniform, RegularDigraph,
    SamplerOptions, SwitchMove,
};
use circlaw_core::rng::{rng_from_seed, trial_rng};
use common::{brute_force_regular, chi_square_uniform_pvalue};
use proptest::prelude::*;

#[test]
fn enumeration_matches_brute_force() {
    for n in 1..=4 {
        for d in 0..=n {
            let fast: Vec<Vec<u8>> = enumerate_all(n, d)
                .unwrap()
                .iter()
                .map(|m| m.row_major_bits())
                .collect();
            assert_eq!(fast, brute_force_regular(n, d), "n = {n}, d = {d}");
        }
    }
}

#[test]
fn known_set_sizes() {
    assert_eq!(enumerate_all(2, 1).unwrap().len(), 2);
    assert_eq!(enumerate_all(3, 3).unwrap().len(), 1);
    assert_eq!(enumerate_all(4, 2).unwrap().len(), 90);
    // Permutation matrices, and their complements for d = 2.
    assert_eq!(enumerate_all(3, 1).unwrap().len(), 6);
    assert_eq!(enumerate_all(3, 2).unwrap().len(), 6);
    assert_eq!(enumerate_all(5, 2).unwrap().len(), 2040);
}

#[test]
fn configuration_sampler_is_uniform_on_4_2() {
    let all = enumerate_all(4, 2).unwrap();
    let index: HashMap<Vec<u8>, usize> = all.iter().enumerate().map(|(k, m)| (m.row_major_bits(), k)).collect();
    let mut counts = vec![0usize; all.len()];
    let mut rng = rng_from_seed(2024);
    for _ in 0..100_000 {
        let m = sample_configuration(4, 2, &mut rng, 10_000).unwrap();
        counts[index[&m.row_major_bits()]] += 1;
    }
    let p = chi_square_uniform_pvalue(&counts);
    assert!(p >= 1e-3, "chi-square p-value {p}");
}

#[test]
fn restricted_enumeration_is_a_filter_of_the_full_set() {
    let all = enumerate_all(5, 2).unwrap();
    let m = &all[777];
    let free = [1, 3, 4];
    let expected: Vec<Vec<u8>> = all
        .iter()
        .filter(|x| {
            (0..5)
                .filter(|i| !free.contains(i))
                .all(|i| x.row_support(i) == m.row_support(i))
        })
        .map(|x| x.row_major_bits())
        .collect();
    let got: Vec<Vec<u8>> = enumerate_restricted(m, &free)
        .unwrap()
        .iter()
        .map(|x| x.row_major_bits())
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn complement_sampling_for_dense_degrees() {
    let mut rng = trial_rng(3, 0);
    let (m, how) = sample_uniform(30, 26, &mut rng, &SamplerOptions::default()).unwrap();
    assert_eq!(m.d(), 26);
    assert!(how.is_exact());
    assert_eq!(RegularDigraph::from_text(&m.to_text()).unwrap(), m);
}

fn arb_digraph() -> impl Strategy<Value = RegularDigraph> {
    (2usize..40, any::<u64>()).prop_flat_map(|(n, seed)| {
        (1..=n).prop_map(move |d| {
            let mut rng = trial_rng(seed, 0);
            let opts = SamplerOptions {
                max_attempts: 20,
                burn_in_accepted: Some(5 * n * d),
            };
            sample_uniform(n, d, &mut rng, &opts).unwrap().0
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_matrices_are_regular(m in arb_digraph()) {
        let dense = m.to_dense();
        for i in 0..m.n() {
            prop_assert_eq!(dense[i].iter().map(|&b| b as usize).sum::<usize>(), m.d());
            prop_assert_eq!(dense.iter().map(|r| r[i] as usize).sum::<usize>(), m.d());
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact(m in arb_digraph()) {
        let text = m.to_text();
        let back = RegularDigraph::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back, m);
    }

    #[test]
    fn switches_preserve_margins_and_invert(m in arb_digraph(), picks in proptest::collection::vec(any::<(usize, usize, usize, usize)>(), 1..20)) {
        let n = m.n();
        let mut cur = m;
        for (a, b, c, e) in picks {
            let Ok(mv) = SwitchMove::new((a % n, b % n), (c % n, e % n)) else { continue };
            if !cur.is_admissible(&mv) {
                prop_assert!(apply_switch(&cur, &mv).is_err());
                continue;
            }
            let next = apply_switch(&cur, &mv).unwrap();
            prop_assert_eq!(&apply_switch(&next, &mv.inverse()).unwrap(), &cur);
            let rebuilt = RegularDigraph::from_dense(&next.to_dense()).unwrap();
            prop_assert_eq!(&rebuilt, &next);
            cur = next;
        }
    }
}
