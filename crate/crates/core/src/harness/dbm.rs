//! Diagnostics along the OU-interpolated family and checks of the
//! Dyson Brownian motion integrator.

use std::time::Instant;

use rayon::prelude::*;

use super::record::{Gate, RunRecord, SampleRow, Stat, Summary};
use super::{build_family, check_row, expect_experiment, finish, par_rows, Experiment, ExperimentConfig, Sampler, CHECK_COLUMNS};
use crate::ensembles::{integrate_dbm, ou_interpolate, sample_goe, sample_wigner, DbmConfig, EntryDistribution, VarianceProfile};
use crate::greenreg::local_scale;
use crate::observables::{overlaps, psi};
use crate::rng::{derive_seed, Domain};
use crate::semicircle::{cdf, m_sc_complex, quantiles};
use crate::spectral::decompose;
use crate::stats::{ks_one_sample, ks_two_sample, median};
use crate::{Complex64, Result};

const KS_FINAL_TOL: f64 = 0.05;
const SUP_RATIO_EXPONENT: f64 = 0.3;
const GAP_EXPONENT: f64 = -0.2;
const GAP_MAX_FRACTION: f64 = 0.10;

/// Per sample and OU time `s`: the local-law residual
/// `max_z N eta |m_N(z) - m_sc(z)|` on a grid with `eta >= N^{-0.9}`,
/// the rigidity residual `max_k N^{2/3} k_hat^{1/3} |lambda_k - gamma_k|`,
/// the KS distance to the semicircle, `sup_{k,l} |p_kl| / Psi(s)` and the
/// normalized gap at the bulk index `floor(N/2)`.
pub fn run_dbm_diagnostics(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::DbmDiagnostics)?;
    let start = Instant::now();
    let sampler = Sampler::new(cfg)?;
    let family = build_family(cfg)?;
    let n = cfg.n;
    let gammas = quantiles(n)?;
    let grid = z_grid(n);
    let times = &cfg.times;
    let i_bulk = n / 2 - 1;
    let rows = par_rows(cfg.samples * times.len(), |r| {
        let (i, ti) = (r / times.len(), r % times.len());
        let s_time = times[ti];
        let h0 = sampler.initial(i)?;
        let h = ou_interpolate(&h0, cfg.ou_time + s_time, sampler.seed(i))?;
        let s = decompose(&h)?;
        let lambdas = s.lambdas();
        let nf = n as f64;
        let local_law = grid
            .iter()
            .map(|&z| {
                let m_n = lambdas.iter().map(|&l| 1.0 / (l - z)).sum::<Complex64>() / nf;
                nf * z.im * (m_n - m_sc_complex(z)).norm()
            })
            .fold(0.0f64, f64::max);
        let rigidity = (0..n)
            .map(|k| (lambdas[k] - gammas.gammas()[k]).abs() / local_scale(n, k))
            .fold(0.0f64, f64::max);
        let ks = ks_one_sample(lambdas, cdf)?.statistic;
        let ratio = overlaps(&s, &family)?.sup_abs() / psi(cfg.ou_time + s_time, family.len(), n)?;
        let gap = (lambdas[i_bulk + 1] - lambdas[i_bulk]) / local_scale(n, i_bulk);
        Ok(SampleRow { sample_index: i, seed: sampler.seed(i), values: vec![s_time, local_law, rigidity, ks, ratio, gap] })
    })?;
    finish(cfg, &["time", "local_law", "rigidity", "ks", "sup_ratio", "bulk_gap"], rows, start)
}

fn z_grid(n: usize) -> Vec<Complex64> {
    let nf = n as f64;
    let mut out = Vec::new();
    for eta in [nf.powf(-0.9), nf.powf(-0.6), nf.powf(-0.3)] {
        for j in 0..=20 {
            out.push(Complex64::new(-2.5 + 0.25 * j as f64, eta));
        }
    }
    out
}

pub(super) fn summarize_dbm(cfg: &ExperimentConfig, rows: &[SampleRow]) -> Result<(Summary, Vec<Gate>)> {
    let nf = cfg.n as f64;
    let mut summary = Summary::default();
    let mut gates = Vec::new();
    let last = cfg.times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &t in &cfg.times {
        let at: Vec<&SampleRow> = rows.iter().filter(|r| r.values[0] == t).collect();
        let col = |i: usize| at.iter().map(|r| r.values[i]).collect::<Vec<_>>();
        let max = |v: Vec<f64>| v.into_iter().fold(0.0f64, f64::max);
        summary.stats.push(Stat::new(format!("s={t} local_law median"), median(&col(1))));
        summary.stats.push(Stat::new(format!("s={t} rigidity max"), max(col(2))));
        summary.stats.push(Stat::new(format!("s={t} ks max"), max(col(3))));
        let ratio = median(&col(4));
        summary.stats.push(Stat::new(format!("s={t} sup_ratio median"), ratio));
        gates.push(Gate::at_most(format!("s={t} median sup|p|/Psi <= N^{SUP_RATIO_EXPONENT}"), ratio, nf.powf(SUP_RATIO_EXPONENT)));
        if t == last {
            gates.push(Gate::at_most(format!("s={t} max KS to semicircle"), max(col(3)), KS_FINAL_TOL));
        }
    }
    let threshold = nf.powf(GAP_EXPONENT);
    let small = rows.iter().filter(|r| r.values[5] < threshold).count() as f64 / rows.len() as f64;
    summary.stats.push(Stat::new("fraction bulk_gap < N^-0.2", small));
    gates.push(Gate::at_most("fraction of small normalized bulk gaps", small, GAP_MAX_FRACTION));
    Ok((summary, gates))
}

/// Names of the rows produced by [`run_dbm_sde_checks`].
pub const SDE_CHECKS: &[&str] = &["stationarity KS p-value", "orthonormality drift", "law-equivalence KS"];

const SDE_N: usize = 200;
const SDE_PATHS: usize = 200;
const SDE_DT: f64 = 1e-4;
const STATIONARY_TIME: f64 = 0.1;
const LAW_TIME: f64 = 0.2;
const ORTHO_N: usize = 20;
const ORTHO_STEPS: usize = 10_000;

/// Checks of the Euler–Maruyama integrator, seeded by the config's master
/// seed:
/// - GOE is stationary: pooled bulk gaps after SDE time 0.1 from GOE starts
///   against fresh GOE samples (two-sample KS p-value > 0.01);
/// - the frame stays orthonormal over `10^4` steps (drift <= 1e-8);
/// - the SDE reproduces the exact OU law from a fixed Rademacher start at
///   time 0.2 (KS distance of pooled bulk gaps <= 0.08).
pub fn run_dbm_sde_checks(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::DbmDiagnostics)?;
    let start = Instant::now();
    let seed = |check: u64| derive_seed(cfg.seed, Domain::Dbm, check);

    let eig_only = |s_end: f64| DbmConfig { track_vectors: false, ..DbmConfig::new(s_end, SDE_DT) };
    let s0 = seed(0);
    let (sde, fresh): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..SDE_PATHS)
        .into_par_iter()
        .map(|i| -> Result<(Vec<f64>, Vec<f64>)> {
            let path_seed = derive_seed(s0, Domain::Instance, i as u64);
            let start = decompose(&sample_goe(SDE_N, derive_seed(path_seed, Domain::Matrix, 0))?)?;
            let traj = integrate_dbm(&start, &eig_only(STATIONARY_TIME), path_seed)?;
            let fresh = decompose(&sample_goe(SDE_N, derive_seed(path_seed, Domain::Matrix, 1))?)?;
            Ok((bulk_gaps(traj.lambdas.last().expect("final snapshot")), bulk_gaps(fresh.lambdas())))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let p_value = ks_two_sample(&sde.concat(), &fresh.concat())?.p_value;

    let s1 = seed(1);
    let start_frame = decompose(&sample_goe(ORTHO_N, s1)?)?;
    let snapshots = (1..=10).map(|j| j as f64 * ORTHO_STEPS as f64 * SDE_DT / 10.0).collect();
    let ortho_cfg = DbmConfig { snapshots, ..DbmConfig::new(ORTHO_STEPS as f64 * SDE_DT, SDE_DT) };
    let traj = integrate_dbm(&start_frame, &ortho_cfg, s1)?;
    let drift = traj.states.iter().map(|s| s.orthonormality_residual()).fold(0.0f64, f64::max);

    let s2 = seed(2);
    let h0 = sample_wigner(&VarianceProfile::flat(SDE_N)?, EntryDistribution::Rademacher, s2)?;
    let d0 = decompose(&h0)?;
    let (sde, exact): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..SDE_PATHS)
        .into_par_iter()
        .map(|i| -> Result<(Vec<f64>, Vec<f64>)> {
            let path_seed = derive_seed(s2, Domain::Instance, i as u64);
            let traj = integrate_dbm(&d0, &eig_only(LAW_TIME), path_seed)?;
            let exact = decompose(&ou_interpolate(&h0, LAW_TIME, path_seed)?)?;
            Ok((bulk_gaps(traj.lambdas.last().expect("final snapshot")), bulk_gaps(exact.lambdas())))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let law_ks = ks_two_sample(&sde.concat(), &exact.concat())?.statistic;

    let rows = vec![
        check_row(0, s0, p_value, 0.01, false),
        check_row(1, s1, drift, 1e-8, true),
        check_row(2, s2, law_ks, 0.08, true),
    ];
    finish(cfg, &CHECK_COLUMNS, rows, start)
}

/// Gaps `lambda_{i+1} - lambda_i` over the middle half of the spectrum.
fn bulk_gaps(lambdas: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    (n / 4..3 * n / 4).map(|i| lambdas[i + 1] - lambdas[i]).collect()
}
