mod common;

use common::{dense_resolvent, jacobi_eigen, random_symmetric};
use eigenmass::spectral::*;
use eigenmass::{Complex64, Error};
use proptest::prelude::*;

#[test]
fn decomposition_matches_jacobi_reference() {
    for seed in 0..10 {
        let m = random_symmetric(12, seed);
        let s = decompose(&m).unwrap();
        let (lambdas, vectors) = jacobi_eigen(&m);
        for k in 0..12 {
            assert!((s.lambda(k) - lambdas[k]).abs() < 1e-12);
            let overlap: f64 = (0..12).map(|i| s.vector(k)[i] * vectors[i][k]).sum();
            assert!((overlap.abs() - 1.0).abs() < 1e-10, "vector {k}: overlap {overlap}");
        }
    }
}

#[test]
fn sign_rule_on_first_nonzero_coordinate() {
    // u = (0, 1/sqrt2, -1/sqrt2) type vectors: first coordinate is zero.
    let m = SymmetricMatrix::from_row_major(3, vec![5.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 2.0, 1.0]).unwrap();
    let s = decompose(&m).unwrap();
    for k in 0..3 {
        let first = s.vector(k).iter().find(|v| v.abs() > SIGN_THRESHOLD).unwrap();
        assert!(*first > 0.0);
    }
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(
        SymmetricMatrix::from_row_major(2, vec![1.0, 2.0, 2.0 + 1e-16 * 4.0, 1.0]),
        Err(Error::NotSymmetric { .. })
    ));
    let mut m = SymmetricMatrix::zeros(3).unwrap();
    m.set(1, 2, f64::NAN);
    assert!(matches!(decompose(&m), Err(Error::NonFinite { .. })));
    assert!(matches!(SpectralPoint::new(0.0, 0.0), Err(Error::OffHalfPlane { .. })));
    assert!(matches!(SpectralPoint::new(0.0, -1.0), Err(Error::OffHalfPlane { .. })));
    assert!(SymmetricMatrix::zeros(0).is_err());
}

#[test]
fn resolvent_entries_match_dense_inverse() {
    let m = random_symmetric(15, 3);
    let s = decompose(&m).unwrap();
    for (re, im) in [(0.3, 1e-3), (-1.0, 0.5), (2.5, 2.0)] {
        let z = SpectralPoint::new(re, im).unwrap();
        let inv = dense_resolvent(&m, z.z());
        for (a, b) in [(0, 0), (3, 7), (14, 2)] {
            let g = green_entry(&s, a, b, z.z());
            assert!((g - inv[a][b]).norm() <= 1e-9 * inv[a][b].norm().max(1.0), "G_{a}{b} at {re}+{im}i");
        }
        let q1: Vec<f64> = (0..15).map(|i| if i == 4 { 1.0 } else { 0.0 }).collect();
        let norm = (15f64).sqrt();
        let q2: Vec<f64> = vec![1.0 / norm; 15];
        let direct: Complex64 = (0..15).map(|j| inv[4][j] * q2[j]).sum();
        let spectral = resolvent_quadratic(&s, &q1, &q2, z).unwrap();
        assert!((direct - spectral).norm() < 1e-9 * direct.norm().max(1.0));
        let trace: Complex64 = (0..15).map(|i| inv[i][i]).sum::<Complex64>() / 15.0;
        assert!((stieltjes(&s, z) - trace).norm() < 1e-9 * trace.norm().max(1.0));
    }
}

#[test]
fn resolvent_quadratic_needs_unit_vectors() {
    let s = decompose(&random_symmetric(4, 1)).unwrap();
    let z = SpectralPoint::new(0.0, 1.0).unwrap();
    assert!(resolvent_quadratic(&s, &[1.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], z).is_err());
    assert!(resolvent_quadratic(&s, &[1.0, 0.0], &[1.0, 0.0], z).is_err());
}

#[test]
fn green_derivative_matches_finite_differences() {
    let mut r = common::rng(11);
    use rand::Rng;
    for inst in 0..100 {
        let m = eigenmass::ensembles::sample_goe(20, 500 + inst).unwrap();
        let s = decompose(&m).unwrap();
        let (a, b, i) = (r.random_range(0..20), r.random_range(0..20), r.random_range(0..20));
        let j = (i + r.random_range(1..20)) % 20;
        let z = SpectralPoint::new(r.random_range(-2.0..2.0), r.random_range(0.2..1.0)).unwrap();
        let h = 1e-5;
        let at = |d: f64| {
            let mut p = m.clone();
            p.set(i, j, m.get(i, j) + d);
            dense_resolvent(&p, z.z())[a][b]
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let exact = green_derivative(&s, a, b, i, j, z).unwrap();
        let g = |x: usize, y: usize| green_entry(&s, x, y, z.z()).norm();
        let scale = (g(a, i) * g(j, b) + g(a, j) * g(i, b)).max(exact.norm());
        assert!((fd - exact).norm() <= 1e-5 * scale, "instance {inst}");
    }
    let s = decompose(&random_symmetric(3, 0)).unwrap();
    let z = SpectralPoint::new(0.0, 1.0).unwrap();
    assert!(green_derivative(&s, 0, 1, 2, 2, z).is_err());
}

#[test]
fn eigenpair_matches_full_decomposition() {
    for (n, seed) in [(2, 1), (17, 2), (64, 3), (150, 4)] {
        let m = random_symmetric(n, seed);
        let s = decompose(&m).unwrap();
        for k in [0, n / 2, n - 1] {
            let p = eigenpair(&m, k).unwrap();
            assert!((p.value - s.lambda(k)).abs() < 1e-10);
            let overlap: f64 = (0..n).map(|i| p.vector[i] * s.vector(k)[i]).sum();
            assert!((overlap - 1.0).abs() < 1e-9, "n = {n}, k = {k}: {overlap}");
        }
        assert!(eigenpair(&m, n).is_err());
    }
}

#[test]
fn one_by_one_matrix() {
    let m = SymmetricMatrix::from_row_major(1, vec![-0.7]).unwrap();
    let s = decompose(&m).unwrap();
    assert_eq!(s.lambdas(), &[-0.7]);
    assert_eq!(s.vector(0), &[1.0]);
    let z = SpectralPoint::new(0.2, 0.1).unwrap();
    assert!((stieltjes(&s, z) - 1.0 / (Complex64::new(-0.7, 0.0) - z.z())).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_invariants(n in 1usize..24, seed in any::<u64>()) {
        let m = random_symmetric(n, seed);
        let s = decompose(&m).unwrap();
        prop_assert!(s.lambdas().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.orthonormality_residual() <= ORTHONORMALITY_TOL);
        let rec = s.reconstruct().combine(1.0, &m, -1.0).unwrap().max_abs();
        prop_assert!(rec <= 1e-12 * m.max_abs().max(1.0) * n as f64);
        let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
        prop_assert!((s.lambdas().iter().sum::<f64>() - trace).abs() <= 1e-12 * n as f64);
    }

    #[test]
    fn resolvent_symmetries(seed in any::<u64>(), re in -3.0f64..3.0, im in 1e-3f64..3.0) {
        let s = decompose(&random_symmetric(8, seed)).unwrap();
        let z = Complex64::new(re, im);
        for (a, b) in [(0, 1), (2, 5), (7, 7)] {
            // G(z)^T = G(z) and G(conj z) = conj G(z).
            let g = green_entry(&s, a, b, z);
            prop_assert!((g - green_entry(&s, b, a, z)).norm() <= 1e-12 * g.norm().max(1.0));
            prop_assert!((green_entry(&s, a, b, z.conj()) - g.conj()).norm() <= 1e-12 * g.norm().max(1.0));
        }
        // Im m_N(z) > 0 on the upper half plane.
        prop_assert!(stieltjes(&s, SpectralPoint::new(re, im).unwrap()).im > 0.0);
    }
}
