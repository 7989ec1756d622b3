//! Deterministic identities of the spectral, semicircle and regularization
//! layers, each checked against an independent route.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::record::RunRecord;
use super::{check_row, expect_experiment, finish, Experiment, ExperimentConfig, CHECK_COLUMNS};
use crate::ensembles::sample_goe;
use crate::greenreg::{poisson_mass, q_ll, q_ll_from_table, theta, z_resolvent, z_spectral, Interval, RegParams};
use crate::observables::{coordinate_family, overlaps, random_family};
use crate::quad::integrate;
use crate::rng::{derive_seed, rng_from_seed, Domain};
use crate::semicircle::{advection_residual, cdf, characteristic, m_sc, quantiles, rho_sc};
use crate::spectral::{decompose, eigenpair, green_derivative, green_entry, spectral_sum, stieltjes, SpectralPoint, SymmetricMatrix};
use crate::{Complex64, Result};

/// Names of the identity rows, in row order.
pub const IDENTITIES: &[&str] = &[
    "key identity (resolvent vs spectral Z)",
    "green derivative vs finite differences",
    "resolvent quadratic form vs linear solve",
    "ward identity",
    "m_sc self-consistent equation",
    "quantile integrals",
    "median quantile at zero",
    "semicircle cdf vs quadrature",
    "advection along characteristics",
    "characteristic at s = 0",
    "Im z_s monotone violations",
    "poisson window mass vs quadrature",
    "q_ll direct vs table",
    "theta operator endpoints",
    "reconstruction U diag(lambda) U^T",
    "frame orthonormality",
    "single eigenpair vs full decomposition",
    "N = 1 edge cases",
];

fn point(rng: &mut ChaCha8Rng, e: (f64, f64), eta: (f64, f64)) -> Result<SpectralPoint> {
    SpectralPoint::new(rng.random_range(e.0..e.1), rng.random_range(eta.0..eta.1))
}

/// Runs every identity at the configured `N` and `|I|` (the finite-difference
/// and semicircle checks use their own fixed sizes). One row per identity:
/// the worst residual over its instances, its threshold.
pub fn run_identity_suite(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::IdentitySuite)?;
    let start = Instant::now();
    let n = cfg.n;
    let m = cfg.set_size_value();
    let seed = |id: usize| derive_seed(cfg.seed, Domain::Instance, id as u64);
    let rng = |id: usize| rng_from_seed(seed(id));
    let mut rows = Vec::new();
    let mut push = |id: usize, value: f64, threshold: f64, at_most: bool| {
        rows.push(check_row(id, seed(id), value, threshold, at_most));
    };

    // Key identity on 25 instances.
    let mut r = rng(0);
    let mut worst = 0.0f64;
    for inst in 0..25u64 {
        let s = decompose(&sample_goe(n, derive_seed(seed(0), Domain::Matrix, inst))?)?;
        let f = random_family(n, m, derive_seed(seed(0), Domain::Family, inst))?;
        let t = overlaps(&s, &f)?;
        let z1 = point(&mut r, (-2.5, 2.5), (1e-3, 1e-1))?;
        let z2 = point(&mut r, (-2.5, 2.5), (1e-3, 1e-1))?;
        let a = z_resolvent(&s, &f, z1, z2)?;
        let b = z_spectral(&t, s.lambdas(), z1, z2)?;
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
    }
    push(0, worst, 1e-9, true);

    // Green derivative against central differences of the perturbed matrix.
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let nd = 20;
    for inst in 0..100u64 {
        let h = sample_goe(nd, derive_seed(seed(1), Domain::Matrix, inst))?;
        let s = decompose(&h)?;
        let (a, b) = (r.random_range(0..nd), r.random_range(0..nd));
        let i = r.random_range(0..nd);
        let j = (i + r.random_range(1..nd)) % nd;
        let z = point(&mut r, (-2.5, 2.5), (0.1, 0.5))?;
        let exact = green_derivative(&s, a, b, i, j, z)?;
        let step = 1e-5;
        let shifted = |d: f64| -> Result<Complex64> {
            let mut p = h.clone();
            p.set(i, j, h.get(i, j) + d);
            Ok(green_entry(&decompose(&p)?, a, b, z.z()))
        };
        let fd = (shifted(step)? - shifted(-step)?) / (2.0 * step);
        let g = |x: usize, y: usize| green_entry(&s, x, y, z.z()).norm();
        let scale = (g(a, i) * g(j, b) + g(a, j) * g(i, b)).max(exact.norm());
        worst = worst.max((fd - exact).norm() / scale);
    }
    push(1, worst, 1e-5, true);

    // <q1, G q2> against a direct solve of the real 2N x 2N block system.
    let mut r = rng(2);
    let h = sample_goe(n, seed(2))?;
    let s = decompose(&h)?;
    let f = random_family(n, 2.min(n), seed(2))?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let z = point(&mut r, (-2.5, 2.5), (1e-3, 1.0))?;
        let (q1, q2) = (f.vector(0), f.vector(f.len() - 1));
        let x = solve_shifted(&h, z.z(), q2);
        let direct: Complex64 = (0..n).map(|i| q1[i] * x[i]).sum();
        let spectral = spectral_sum(&s, q1, q2, z.z());
        worst = worst.max((direct - spectral).norm() / spectral.norm().max(1.0));
    }
    push(2, worst, 1e-10, true);

    // Ward identity sum_b |G_ab|^2 = Im G_aa / eta.
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let z = point(&mut r, (-2.5, 2.5), (1e-2, 1.0))?;
        let a = r.random_range(0..n);
        let lhs: f64 = (0..n).map(|b| green_entry(&s, a, b, z.z()).norm_sqr()).sum();
        let rhs = green_entry(&s, a, a, z.z()).im / z.im();
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
    }
    push(3, worst, 1e-10, true);

    // m_sc^2 + z m_sc + 1 = 0.
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let z = point(&mut r, (-5.0, 5.0), (1e-6, 5.0))?;
        let w = m_sc(z);
        worst = worst.max((w * w + z.z() * w + 1.0).norm());
    }
    push(4, worst, 1e-12, true);

    // Quantiles: int_{-2}^{gamma_i} rho = i / N for N = 1000.
    let nq = 1000;
    let q = quantiles(nq)?;
    let mut worst = 0.0f64;
    for (i, &g) in q.gammas().iter().enumerate() {
        let mass = integrate(rho_sc, -2.0, g, 1e-14, 0.0).value;
        worst = worst.max((mass - (i + 1) as f64 / nq as f64).abs());
    }
    push(5, worst, 1e-10, true);
    push(6, q.gammas()[nq / 2 - 1].abs(), 1e-10, true);

    // Closed-form cdf against quadrature of the density.
    let mut worst = 0.0f64;
    for j in 0..=80 {
        let e = -2.0 + 0.05 * j as f64;
        worst = worst.max((cdf(e) - integrate(rho_sc, -2.0, e, 1e-15, 0.0).value).abs());
    }
    push(7, worst, 1e-12, true);

    // Advection of 100 smooth fields along the characteristics.
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for inst in 0..100 {
        let a = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let w = Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..-0.5));
        let b = r.random_range(-0.5..0.5);
        let c = Complex64::new(0.0, r.random_range(-0.5..0.5));
        let field = move |z: Complex64| a / (z - w) + b * z * z + (c * z).exp();
        let z = point(&mut r, (-3.0, 3.0), (0.1, 1.0))?;
        let s = if inst % 10 == 0 { 0.0 } else { r.random_range(0.0..1.0) };
        worst = worst.max(advection_residual(field, z, s)?);
    }
    push(8, worst, 1e-6, true);

    // z_0 = z exactly; Im z_s increasing along sweeps in s.
    let mut r = rng(9);
    let mut exact = 0.0f64;
    let mut violations = 0usize;
    for _ in 0..100 {
        let z = point(&mut r, (-3.0, 3.0), (1e-3, 1.0))?;
        let z0 = characteristic(z, 0.0)?;
        exact = exact.max((z0.z() - z.z()).norm());
        let mut prev = z.im();
        for k in 1..=100 {
            let im = characteristic(z, k as f64 / 100.0)?.im();
            if im <= prev {
                violations += 1;
            }
            prev = im;
        }
    }
    push(9, exact, 0.0, true);
    push(10, violations as f64, 0.0, true);

    // Window mass in closed form against quadrature of the Poisson kernel.
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let lambda = r.random_range(-2.0..2.0);
        let eta = 10f64.powf(r.random_range(-3.0..0.0));
        let lo = r.random_range(-2.5..2.0);
        let iv = Interval::new(lo, lo + r.random_range(1e-3..0.5));
        let kernel = |e: f64| eta / ((e - lambda).powi(2) + eta * eta);
        let closed = poisson_mass(lambda, &iv, eta);
        let quad = integrate(kernel, iv.lo, iv.hi, 1e-14, 1e-13).value;
        worst = worst.max((closed - quad).abs() / closed.abs().max(1e-3));
    }
    push(11, worst, 1e-10, true);

    // q_ll through the per-vector integrals and through the overlap table.
    let params = RegParams::default();
    let f = random_family(n, m, seed(12))?;
    let t = overlaps(&s, &f)?;
    let mut worst = 0.0f64;
    for l in [0, n / 2, n - 1] {
        let a = q_ll(&s, &f, l, &params)?;
        let b = q_ll_from_table(&t, s.lambdas(), l, &params)?;
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    push(12, worst, 1e-10, true);

    // Theta_1 is the identity, Theta_0 clears the mirrored pair.
    let mut worst = 0.0f64;
    for (a, b) in [(0, n - 1), (n / 2, n / 2), (1, 0)] {
        let same = theta(&h, a, b, 1.0)?;
        let cleared = theta(&h, a, b, 0.0)?;
        let diff = (0..n * n).map(|k| (same.as_slice()[k] - h.as_slice()[k]).abs()).fold(0.0, f64::max);
        worst = worst.max(diff).max(cleared.get(a, b).abs()).max(cleared.get(b, a).abs());
    }
    push(13, worst, 0.0, true);

    // Reconstruction and orthonormality of the decomposition.
    let rec = s.reconstruct().combine(1.0, &h, -1.0)?.max_abs();
    push(14, rec / h.max_abs(), 1e-12, true);
    push(15, s.orthonormality_residual(), 1e-10, true);

    // The single-eigenpair path agrees with the full decomposition.
    let mut worst = 0.0f64;
    for k in [0, n / 2, n - 1] {
        let p = eigenpair(&h, k)?;
        let overlap: f64 = (0..n).map(|i| p.vector[i] * s.vector(k)[i]).sum();
        worst = worst.max((p.value - s.lambda(k)).abs()).max((overlap.abs() - 1.0).abs());
    }
    push(16, worst, 1e-9, true);

    // N = 1: every centred observable vanishes, the resolvent is 1/(x - z).
    let x = 0.3;
    let one = decompose(&SymmetricMatrix::from_row_major(1, vec![x])?)?;
    let f1 = coordinate_family(1, &[0])?;
    let t1 = overlaps(&one, &f1)?;
    let z = SpectralPoint::new(0.1, 0.2)?;
    let mut worst = t1.p(0, 0).abs();
    worst = worst.max(z_spectral(&t1, one.lambdas(), z, z)?.abs());
    worst = worst.max(z_resolvent(&one, &f1, z, z)?.abs());
    worst = worst.max((stieltjes(&one, z) - 1.0 / (x - z.z())).norm());
    worst = worst.max((quantiles(1)?.gammas()[0] - 2.0).abs());
    worst = worst.max((one.vector(0)[0] - 1.0).abs());
    push(17, worst, 1e-14, true);

    finish(cfg, &CHECK_COLUMNS, rows, start)
}

/// `(H - z)^{-1} q` from the real block system
/// `[[H - E, eta], [-eta, H - E]] [x_re; x_im] = [q; 0]`.
fn solve_shifted(h: &SymmetricMatrix, z: Complex64, q: &[f64]) -> Vec<Complex64> {
    let n = h.dim();
    let a = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let (ii, jj) = (i % n, j % n);
        let shift = if ii == jj { z.re } else { 0.0 };
        match (bi, bj) {
            (0, 0) | (1, 1) => h.get(ii, jj) - shift,
            (0, 1) if ii == jj => z.im,
            (1, 0) if ii == jj => -z.im,
            _ => 0.0,
        }
    });
    let rhs = Mat::from_fn(2 * n, 1, |i, _| if i < n { q[i] } else { 0.0 });
    let x = a.partial_piv_lu().solve(&rhs);
    (0..n).map(|i| Complex64::new(x[(i, 0)], x[(n + i, 0)])).collect()
}
