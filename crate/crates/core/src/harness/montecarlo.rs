//! Monte Carlo experiments: CLT moments, QUE suprema and the regularized
//! comparison.

use std::time::Instant;

use super::record::{Gate, RunRecord, SampleRow, Stat, Summary};
use super::{build_family, expect_experiment, finish, par_rows, Experiment, ExperimentConfig, Sampler};
use crate::greenreg::{domination, q_ll_from_table};
use crate::matchings::double_factorial_odd;
use crate::observables::{clt_statistic_for_vector, overlaps};
use crate::spectral::{decompose, eigenpair};
use crate::stats::{mean, median, quantile, raw_moment, raw_moment_se, variance, variance_jackknife_se};
use crate::{Error, Result};

/// Gate width in standard errors.
pub const SE_GATE: f64 = 4.0;

/// QUE gate: at most this fraction of samples may exceed `N^0.3`.
const QUE_EXPONENT: f64 = 0.3;
const QUE_MAX_FRACTION: f64 = 0.01;

const REG_MEDIAN_TOL: f64 = 0.2;
/// Rounding slack for `v - own_term`, relative to `v`.
const DOMINATION_SLACK: f64 = 1e-12;

fn column(rows: &[SampleRow], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r.values[i]).collect()
}

/// Per sample: draw, compute the eigenpair at the configured index and the
/// statistic `sqrt(N^2 / (2|I|)) p_kk`.
pub fn run_clt(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::Clt)?;
    let start = Instant::now();
    let sampler = Sampler::new(cfg)?;
    let family = build_family(cfg)?;
    let k = cfg.index.resolve(cfg.n);
    let rows = par_rows(cfg.samples, |i| {
        let pair = eigenpair(&sampler.matrix(i)?, k)?;
        let stat = clt_statistic_for_vector(&pair.vector, &family, 1)?;
        Ok(SampleRow { sample_index: i, seed: sampler.seed(i), values: vec![pair.value, stat] })
    })?;
    finish(cfg, &["lambda_k", "statistic"], rows, start)
}

pub(super) fn summarize_clt(_cfg: &ExperimentConfig, rows: &[SampleRow]) -> Result<(Summary, Vec<Gate>)> {
    let x = column(rows, 1);
    let many = x.len() >= 2;
    let mut summary = Summary::default();
    for p in 1..=6 {
        let target = if p % 2 == 1 { 0.0 } else { double_factorial_odd(p as usize / 2)? as f64 };
        let se = many.then(|| raw_moment_se(&x, p));
        summary.stats.push(Stat::new(format!("m{p}"), raw_moment(&x, p)).with_se(se).with_target(target));
    }
    let mut gates = Vec::new();
    if many {
        summary
            .stats
            .push(Stat::new("variance", variance(&x)).with_se(Some(variance_jackknife_se(&x))).with_target(1.0));
        for name in ["m1", "variance", "m4"] {
            let s = summary.get(name).expect("stat present");
            let se = s.se.expect("se present");
            let dev = (s.value - s.target.expect("target present")).abs();
            gates.push(Gate::at_most(format!("{name} within {SE_GATE} SE of target"), dev, SE_GATE * se));
        }
    } else {
        summary.notes.push("one sample: standard errors are undefined".into());
        gates.push(Gate::failed("moment gates", "standard errors are undefined with one sample"));
    }
    Ok((summary, gates))
}

/// Per sample: `sup_k |hat p_kk|`, `sup_{k != l} |hat p_kl|` and their maximum.
pub fn run_que(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::Que)?;
    let start = Instant::now();
    let sampler = Sampler::new(cfg)?;
    let family = build_family(cfg)?;
    let rows = par_rows(cfg.samples, |i| {
        let s = decompose(&sampler.matrix(i)?)?;
        let (diag, off) = overlaps(&s, &family)?.hat_p_sups();
        Ok(SampleRow { sample_index: i, seed: sampler.seed(i), values: vec![diag, off, diag.max(off)] })
    })?;
    finish(cfg, &["sup_diag", "sup_off", "sup_all"], rows, start)
}

fn exceedance(xs: &[f64], level: f64) -> f64 {
    xs.iter().filter(|&&x| x > level).count() as f64 / xs.len() as f64
}

pub(super) fn summarize_que(cfg: &ExperimentConfig, rows: &[SampleRow]) -> Result<(Summary, Vec<Gate>)> {
    let all = column(rows, 2);
    let nf = cfg.n as f64;
    let mut summary = Summary::default();
    summary.stats.push(Stat::new("sup_diag median", median(&column(rows, 0))));
    summary.stats.push(Stat::new("sup_off median", median(&column(rows, 1))));
    for q in [0.5, 0.9, 0.99, 1.0] {
        summary.stats.push(Stat::new(format!("sup_all q{q}"), quantile(&all, q)));
    }
    for &e in &cfg.epsilon_grid {
        summary.stats.push(Stat::new(format!("exceedance N^{e}"), exceedance(&all, nf.powf(e))));
    }
    let frac = exceedance(&all, nf.powf(QUE_EXPONENT));
    let gates = vec![Gate::at_most(format!("fraction above N^{QUE_EXPONENT}"), frac, QUE_MAX_FRACTION)];
    Ok((summary, gates))
}

/// Per sample: `q_ll` against `hat p_ll` at the configured index, and the
/// domination split `v(k, l) = c hat p_kl^2 + (non-negative rest)` for all
/// pairs within two indices of `l`.
pub fn run_regularized_compare(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::RegularizedCompare)?;
    let start = Instant::now();
    let sampler = Sampler::new(cfg)?;
    let family = build_family(cfg)?;
    let n = cfg.n;
    let l = cfg.index.resolve(n);
    let near: Vec<usize> = (l.saturating_sub(2)..=(l + 2).min(n - 1)).collect();
    let rows = par_rows(cfg.samples, |i| {
        let s = decompose(&sampler.matrix(i)?)?;
        let t = overlaps(&s, &family)?;
        let q = q_ll_from_table(&t, s.lambdas(), l, &cfg.reg)?;
        let hp = t.hat_p(l, l);
        let mut v_ll = 0.0;
        let mut min_rel = f64::INFINITY;
        for &a in &near {
            for &b in &near {
                let d = domination(&t, s.lambdas(), a, b, &cfg.reg)?;
                if a == l && b == l {
                    v_ll = d.v;
                }
                if d.v < 0.0 {
                    return Err(Error::invalid(format!("negative v({a}, {b}) = {}", d.v)));
                }
                min_rel = min_rel.min(if d.v > 0.0 { d.margin / d.v } else { 0.0 });
            }
        }
        Ok(SampleRow {
            sample_index: i,
            seed: sampler.seed(i),
            values: vec![l as f64, q, hp, (q - hp).abs(), v_ll, hp * hp, min_rel],
        })
    })?;
    finish(cfg, &["l", "q_ll", "hat_p_ll", "abs_diff", "v_ll", "hat_p_ll_sq", "min_rel_margin"], rows, start)
}

pub(super) fn summarize_reg(cfg: &ExperimentConfig, rows: &[SampleRow]) -> Result<(Summary, Vec<Gate>)> {
    let diff = column(rows, 3);
    let margins = column(rows, 6);
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let mut summary = Summary::default();
    summary.stats.push(Stat::new("median |q_ll - hat_p_ll|", median(&diff)));
    summary.stats.push(Stat::new("mean |q_ll - hat_p_ll|", mean(&diff)));
    summary.stats.push(Stat::new("q0.9 |q_ll - hat_p_ll|", quantile(&diff, 0.9)));
    summary.stats.push(Stat::new("window constant", cfg.reg.window_constant(cfg.n)));
    summary.stats.push(Stat::new("min relative domination margin", worst));
    let gates = vec![
        Gate::at_least("domination margin >= 0 in every term", worst, -DOMINATION_SLACK),
        Gate::at_most("median |q_ll - hat_p_ll|", median(&diff), REG_MEDIAN_TOL),
    ];
    Ok((summary, gates))
}
