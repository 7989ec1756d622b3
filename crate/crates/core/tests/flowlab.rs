mod common;

use std::collections::HashMap;

use eigenmass::flowlab::*;
use eigenmass::matchings::{FourLabels, ParticleConfiguration};
use eigenmass::observables::overlaps;
use eigenmass::Error;
use proptest::prelude::*;

/// `d^2/dtheta^2 sum_a <q_a, cos u_k - sin u_l>^2 = 2 sum_a (<q_a,u_l>^2 - <q_a,u_k>^2)`.
#[test]
fn second_derivative_of_diagonal_overlap() {
    let (s, f) = random_instance(8, 3, 11).unwrap();
    let t = overlaps(&s, &f).unwrap();
    for (k, l) in [(0, 1), (2, 7), (5, 3)] {
        let o = FlowObservable::FMatching { config: ParticleConfiguration::single_site(8, k, 1).unwrap() };
        let exact = 2.0 * (t.p(l, l) - t.p(k, k));
        let got = apply_generator_sq(&o, &s, &f, k, l, 1e-3).unwrap();
        assert!((got - exact).abs() < 1e-8, "{got} vs {exact}");
        let bystander = FlowObservable::FMatching { config: ParticleConfiguration::single_site(8, 4, 1).unwrap() };
        if k != 4 && l != 4 {
            assert!(apply_generator_sq(&bystander, &s, &f, k, l, 1e-3).unwrap().abs() < 1e-8);
        }
    }
}

#[test]
fn richardson_beats_plain_difference() {
    let (s, f) = random_instance(6, 2, 3).unwrap();
    let t = overlaps(&s, &f).unwrap();
    let o = FlowObservable::FMatching { config: ParticleConfiguration::single_site(6, 1, 1).unwrap() };
    let exact = 2.0 * (t.p(4, 4) - t.p(1, 1));
    let plain = (second_difference(&o, &s, &f, 1, 4, 1e-3).unwrap() - exact).abs();
    let refined = (apply_generator_sq(&o, &s, &f, 1, 4, 1e-3).unwrap() - exact).abs();
    assert!(refined < plain, "{refined:e} !< {plain:e}");
    assert!(apply_generator_sq(&o, &s, &f, 1, 4, 1e-2).is_err());
}

#[test]
fn rotation_preserves_orthonormality() {
    let (s, _) = random_instance(7, 1, 5).unwrap();
    let r = rotate_pair(&s, 2, 6, 0.7).unwrap();
    assert!(r.orthonormality_residual() < 1e-14);
    assert_eq!(r.lambdas(), s.lambdas());
    assert!(rotate_pair(&s, 2, 2, 0.1).is_err());
}

#[test]
fn constant_is_annihilated() {
    let (s, f) = random_instance(6, 2, 9).unwrap();
    let r = generator_flow_residual(&FlowObservable::Constant(3.5), &s, &f, DEFAULT_STEP).unwrap();
    assert!(r.absolute < 1e-8);
    assert_eq!(r.rhs, 0.0);
}

#[test]
fn pair_assignment_flow_holds() {
    for seed in 0..4 {
        let (s, f) = random_instance(7, 4, 20 + seed).unwrap();
        let config = ParticleConfiguration::new(7, &[(1, 1), (4 + seed as usize % 3, 1)]).unwrap();
        let o = FlowObservable::GPairs { config, labels: vec![3, 0, 2, 1] };
        let r = generator_flow_residual(&o, &s, &f, DEFAULT_STEP).unwrap();
        assert!(r.relative < 1e-5, "seed {seed}: {r:?}");
    }
}

#[test]
fn four_point_flows_hold() {
    let labels = FourLabels::new(0, 2, 1, 3);
    for (seed, (j, k)) in [(0, (1, 5)), (1, (3, 3)), (2, (6, 0))] {
        let (s, f) = random_instance(7, 4, 40 + seed).unwrap();
        for o in [FlowObservable::G4 { labels, j, k }, FlowObservable::H4 { labels, j, k }] {
            let r = generator_flow_residual(&o, &s, &f, DEFAULT_STEP).unwrap();
            assert!(r.relative < 1e-5, "{:?} ({j},{k}): {r:?}", o.kind());
        }
    }
}

#[test]
fn matching_flow_runs_at_half_rate() {
    let (s, f) = random_instance(6, 2, 60).unwrap();
    let o = FlowObservable::FMatching { config: ParticleConfiguration::new(6, &[(0, 1), (3, 1)]).unwrap() };
    let r = generator_flow_residual(&o, &s, &f, DEFAULT_STEP).unwrap();
    assert!((r.generator / r.rhs - 0.5).abs() < 1e-4, "{r:?}");
}

#[test]
fn hand_assembled_particle_flow() {
    // N = 2, one particle moving between two sites separated by d = 0.5.
    let lambdas = [-0.25, 0.25];
    let here = ParticleConfiguration::single_site(2, 0, 1).unwrap();
    let there = ParticleConfiguration::single_site(2, 1, 1).unwrap();
    let mut values = HashMap::new();
    values.insert(here.clone(), 1.0);
    values.insert(there.clone(), 3.0);
    let expected = 2.0 * (3.0 - 1.0) / (2.0 * 0.25);
    assert!((emf_rhs(&values, &lambdas, &here).unwrap() - expected).abs() < 1e-14);
    assert!((emf2_rhs(&values, &lambdas, &here).unwrap() - expected / 2.0).abs() < 1e-14);
    values.remove(&there);
    assert!(matches!(emf_rhs(&values, &lambdas, &here), Err(Error::MissingValue(_))));
    assert!(emf_rhs(&values, &[0.0, 1.0, 2.0], &here).is_err());
}

#[test]
fn fermionic_rhs_vanishes_on_diagonal() {
    let values: HashMap<(usize, usize), f64> = (0..3).flat_map(|a| (0..3).map(move |b| ((a, b), 1.0 + a as f64))).collect();
    assert_eq!(fermionic_rhs(&values, &[-1.0, 0.0, 1.0], 1, 1).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generator_second_derivative_is_exact_on_random_pairs(seed in 0u64..500, k in 0usize..6, l in 0usize..6) {
        prop_assume!(k != l);
        let (s, f) = random_instance(6, 2, seed).unwrap();
        let t = overlaps(&s, &f).unwrap();
        let o = FlowObservable::FMatching { config: ParticleConfiguration::single_site(6, k, 1).unwrap() };
        let got = apply_generator_sq(&o, &s, &f, k, l, 1e-3).unwrap();
        prop_assert!((got - 2.0 * (t.p(l, l) - t.p(k, k))).abs() < 1e-8);
    }
}
