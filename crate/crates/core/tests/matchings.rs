mod common;

use std::collections::BTreeSet;

use common::{all_matchings, count_matchings, factorial, permutations, random_symmetric};
use eigenmass::matchings::*;
use eigenmass::observables::{coordinate_family, overlaps, random_family, OverlapTable};
use eigenmass::spectral::decompose;
use eigenmass::Error;
use proptest::prelude::*;

fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn shape_config(n_sites: usize, shape: &[usize]) -> ParticleConfiguration {
    let sites: Vec<(usize, usize)> = shape.iter().enumerate().map(|(i, &m)| (2 * i + 1, m)).collect();
    ParticleConfiguration::new(n_sites, &sites).unwrap()
}

fn table(n: usize, m: usize, seed: u64) -> OverlapTable {
    let s = decompose(&random_symmetric(n, seed)).unwrap();
    overlaps(&s, &random_family(n, m, seed + 1).unwrap()).unwrap()
}

/// `f` from an explicit list of matchings of the doubled site list.
fn brute_f(t: &OverlapTable, c: &ParticleConfiguration) -> f64 {
    let sites: Vec<usize> = c.particle_sites().into_iter().flat_map(|s| [s, s]).collect();
    let sum: f64 = all_matchings(sites.len())
        .iter()
        .map(|g| g.iter().map(|&(a, b)| t.p(sites[a], sites[b])).product::<f64>())
        .sum();
    let m: f64 = c.occupied().map(|(_, x)| count_matchings(2 * x) as f64).product();
    sum / m
}

/// `g` by averaging over all orderings of the labels; each pair assignment
/// appears `2^n` times.
fn brute_g(t: &OverlapTable, labels: &[usize], c: &ParticleConfiguration) -> f64 {
    let sites = c.particle_sites();
    let perms = permutations(labels.len());
    let sum: f64 = perms
        .iter()
        .map(|pi| {
            sites
                .iter()
                .enumerate()
                .map(|(v, &k)| t.projection(labels[pi[2 * v]], k) * t.projection(labels[pi[2 * v + 1]], k))
                .product::<f64>()
        })
        .sum();
    let m: f64 = c.occupied().map(|(_, x)| count_matchings(2 * x) as f64).product();
    sum / perms.len() as f64 / m
}

#[test]
fn matching_counts_for_every_shape() {
    for n in 1..=5 {
        let expected = double_factorial_odd(n).unwrap();
        assert_eq!(expected, count_matchings(2 * n));
        for shape in partitions(n, n) {
            let c = shape_config(12, &shape);
            let ms = enumerate_perfect_matchings(&c).unwrap();
            assert_eq!(ms.len() as u64, expected, "shape {shape:?}");
            let mut seen = BTreeSet::new();
            for g in &ms {
                let mut covered: Vec<Vertex> = g.iter().flat_map(|&(a, b)| [a, b]).collect();
                covered.sort();
                let before = covered.len();
                covered.dedup();
                assert_eq!(covered.len(), before);
                assert_eq!(covered.len(), 2 * n);
                let mut key = g.clone();
                key.sort();
                assert!(seen.insert(key));
            }
        }
    }
}

#[test]
fn assignment_counts() {
    for n in 1..=4u64 {
        let expected = factorial(2 * n) / 2u64.pow(n as u32);
        for shape in partitions(n as usize, n as usize) {
            let c = shape_config(10, &shape);
            let a = enumerate_pair_assignments(&c).unwrap();
            assert_eq!(a.len() as u64, expected);
            for sigma in &a {
                let mut used: Vec<usize> = sigma.iter().flat_map(|&(x, y)| {
                    assert!(x < y);
                    [x, y]
                }).collect();
                used.sort();
                assert_eq!(used, (0..2 * n as usize).collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn matching_factor_is_product_of_site_counts() {
    let c = ParticleConfiguration::new(8, &[(0, 3), (4, 2), (7, 1)]).unwrap();
    assert_eq!(m_factor(&c).unwrap(), 15 * 3);
    assert_eq!(double_factorial_odd(0).unwrap(), 1);
    assert_eq!(double_factorial_odd(4).unwrap(), 105);
}

#[test]
fn single_site_reduces_to_power() {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 6 + (i as usize % 5);
        let t = table(n, 1 + (i as usize % 4), 100 + i);
        let k = i as usize % n;
        for m in 1..=4 {
            let c = ParticleConfiguration::single_site(n, k, m).unwrap();
            worst = worst.max((f_polynomial(&t, &c).unwrap() - t.p(k, k).powi(m as i32)).abs());
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn f_matches_explicit_matching_sum() {
    for (i, shape) in partitions(5, 5).into_iter().chain(partitions(4, 4)).enumerate() {
        let t = table(11, 3, 7 + i as u64);
        let c = shape_config(11, &shape);
        let a = f_polynomial(&t, &c).unwrap();
        let b = brute_f(&t, &c);
        assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()), "{shape:?}: {a} vs {b}");
    }
}

#[test]
fn f_two_sites_closed_form() {
    let t = table(9, 2, 31);
    let c = ParticleConfiguration::new(9, &[(2, 1), (5, 1)]).unwrap();
    let expected = t.p(2, 2) * t.p(5, 5) + 2.0 * t.p(2, 5).powi(2);
    assert!((f_polynomial(&t, &c).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn g_matches_permutation_average() {
    for (i, shape) in partitions(3, 3).into_iter().chain(partitions(2, 2)).chain([vec![1]]).enumerate() {
        let n: usize = shape.iter().sum();
        let t = table(10, 2 * n + 1, 50 + i as u64);
        let labels: Vec<usize> = (0..2 * n).rev().collect();
        let c = shape_config(10, &shape);
        let a = g_polynomial(&t, &labels, &c).unwrap();
        let b = brute_g(&t, &labels, &c);
        assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()), "{shape:?}: {a} vs {b}");
    }
}

#[test]
fn g_rejects_bad_labels() {
    let t = table(6, 2, 3);
    let c = ParticleConfiguration::single_site(6, 1, 1).unwrap();
    assert!(matches!(g_polynomial(&t, &[0], &c), Err(Error::DimensionMismatch { .. })));
    assert!(g_polynomial(&t, &[0, 2], &c).is_err());
}

#[test]
fn g4_is_scaled_g() {
    let n = 12;
    let t = table(n, 5, 77);
    let l = FourLabels::new(0, 3, 1, 4);
    for (j, k) in [(2, 2), (2, 7), (7, 2), (0, 11)] {
        let c = ParticleConfiguration::new(n, &[(j, 1), (k, 1)]).unwrap();
        let g = g_polynomial(&t, &l.ordered(), &c).unwrap();
        let g4 = g4_symmetrized(&t, &l, j, k).unwrap();
        assert!((g4 - (n * n) as f64 * g).abs() < 1e-13, "({j},{k})");
    }
}

#[test]
fn four_point_symmetries() {
    let t = table(10, 4, 5);
    let l = FourLabels::new(0, 1, 2, 3);
    for j in 0..10 {
        assert_eq!(h4_fermionic(&t, &l, j, j).unwrap(), 0.0);
        for k in 0..10 {
            let a = g4_symmetrized(&t, &l, j, k).unwrap();
            let b = g4_symmetrized(&t, &l, k, j).unwrap();
            assert!((a - b).abs() < 1e-15);
            let y = four_point(&t, &l, j, j, k, k) + four_point(&t, &l, k, k, j, j);
            if j != k {
                let h = h4_fermionic(&t, &l, j, k).unwrap();
                assert!((h - (50.0 * y - a)).abs() < 1e-13);
            }
        }
    }
    assert!(g4_symmetrized(&t, &FourLabels::new(0, 0, 1, 2), 1, 2).is_err());
    assert!(h4_fermionic(&t, &FourLabels::new(0, 1, 2, 4), 1, 2).is_err());
}

#[test]
fn enumeration_caps() {
    let big = ParticleConfiguration::single_site(4, 0, MATCHING_CAP + 1).unwrap();
    assert!(matches!(enumerate_perfect_matchings(&big), Err(Error::EnumerationCap { .. })));
    let t = overlaps(&decompose(&random_symmetric(4, 1)).unwrap(), &coordinate_family(4, &[0]).unwrap()).unwrap();
    assert!(matches!(f_polynomial(&t, &big), Err(Error::EnumerationCap { .. })));
    let six = ParticleConfiguration::single_site(4, 0, ASSIGNMENT_CAP + 1).unwrap();
    assert!(matches!(enumerate_pair_assignments(&six), Err(Error::EnumerationCap { .. })));
}

#[test]
fn moving_particles() {
    let c = ParticleConfiguration::new(5, &[(1, 2), (3, 1)]).unwrap();
    let d = c.move_particle(1, 4).unwrap();
    assert_eq!((d.get(1), d.get(3), d.get(4)), (1, 1, 1));
    assert_eq!(d.total(), 3);
    assert_eq!(c.move_particle(0, 2).unwrap(), c);
    assert_eq!(c.move_particle(3, 3).unwrap(), c);
    let e = c.move_particle(3, 1).unwrap();
    assert_eq!(e.particle_sites(), vec![1, 1, 1]);
    assert!(c.move_particle(5, 1).is_err());
    assert!(ParticleConfiguration::new(5, &[(1, 0)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_is_independent_of_site_listing_order(seed in 0u64..1000, a in 0usize..8, b in 0usize..8, m in 1usize..3) {
        let t = table(8, 3, seed);
        let c1 = ParticleConfiguration::new(8, &[(a, m), (b, 1)]).unwrap();
        let c2 = ParticleConfiguration::new(8, &[(b, 1), (a, m)]).unwrap();
        prop_assert_eq!(&c1, &c2);
        prop_assert!((f_polynomial(&t, &c1).unwrap() - brute_f(&t, &c2)).abs() < 1e-13);
    }

    #[test]
    fn f_is_bounded_by_sup(seed in 0u64..1000, a in 0usize..7, b in 0usize..7) {
        let t = table(7, 2, seed);
        let c = ParticleConfiguration::new(7, &[(a, 2), (b, 1)]).unwrap();
        let s = t.sup_abs();
        prop_assert!(f_polynomial(&t, &c).unwrap().abs() <= 15.0 / 3.0 * s.powi(3) + 1e-15);
    }
}

#[test]
fn g_with_repeated_label_is_normalized_moment() {
    let t = table(9, 3, 88);
    for n in 1..=4 {
        let c = ParticleConfiguration::single_site(9, 4, n).unwrap();
        let g = g_polynomial(&t, &vec![1; 2 * n], &c).unwrap();
        let expected = t.projection(1, 4).powi(2 * n as i32) / double_factorial_odd(n).unwrap() as f64;
        assert!((g - expected).abs() <= 1e-12 * expected.abs(), "n = {n}");
    }
}
