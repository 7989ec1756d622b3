//! Config-driven experiments over the library: Monte Carlo runs, identity
//! suites and flow checks, each producing a [`RunRecord`] whose summary is
//! recomputable from its persisted per-sample rows.
//!
//! Samples are processed in parallel; sample `i` draws all randomness from
//! seeds derived from `(master seed, i)`, and rows are kept in index order,
//! so records do not depend on the number of worker threads.

mod config;
mod dbm;
mod flowcheck;
mod identity;
mod montecarlo;
mod output;
mod record;

use std::time::Instant;

use rayon::prelude::*;

pub use config::{Ensemble, Experiment, ExperimentConfig, FamilyKind, IndexRule, OutputFormat, SetSize};
pub use dbm::{run_dbm_diagnostics, run_dbm_sde_checks, SDE_CHECKS};
pub use flowcheck::{run_flow_check, FLOW_KINDS};
pub use identity::{run_identity_suite, IDENTITIES};
pub use montecarlo::{run_clt, run_que, run_regularized_compare};
pub use output::{histogram_svg, read_rows_csv, write_record, write_rows_csv};
pub use record::{Gate, RunRecord, SampleRow, Stat, Summary, Versions};

use crate::ensembles::{build_variance_profile, ou_interpolate, sample_goe, sample_wigner, VarianceProfile};
use crate::observables::{coordinate_family, random_family, TestFamily};
use crate::rng::{derive_seed, Domain};
use crate::spectral::SymmetricMatrix;
use crate::{Error, Result};

/// Runs the configured experiment. `dbm-diagnostics` yields two records:
/// the diagnostics along the OU family and the SDE integrator checks.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    Ok(match cfg.experiment {
        Experiment::Clt => vec![run_clt(cfg)?],
        Experiment::Que => vec![run_que(cfg)?],
        Experiment::IdentitySuite => vec![run_identity_suite(cfg)?],
        Experiment::FlowCheck => vec![run_flow_check(cfg)?],
        Experiment::DbmDiagnostics => vec![run_dbm_diagnostics(cfg)?, run_dbm_sde_checks(cfg)?],
        Experiment::RegularizedCompare => vec![run_regularized_compare(cfg)?],
    })
}

/// Recomputes summary and gates from rows alone.
pub fn summarize(cfg: &ExperimentConfig, rows: &[SampleRow]) -> Result<(Summary, Vec<Gate>)> {
    match cfg.experiment {
        Experiment::Clt => montecarlo::summarize_clt(cfg, rows),
        Experiment::Que => montecarlo::summarize_que(cfg, rows),
        Experiment::RegularizedCompare => montecarlo::summarize_reg(cfg, rows),
        Experiment::IdentitySuite => Ok(check_summary(rows, IDENTITIES)),
        Experiment::FlowCheck => flowcheck::summarize_flow(rows),
        Experiment::DbmDiagnostics => {
            // The two dbm records are told apart by their row width.
            if rows.first().is_some_and(|r| r.values.len() == 3) {
                Ok(check_summary(rows, SDE_CHECKS))
            } else {
                dbm::summarize_dbm(cfg, rows)
            }
        }
    }
}

fn expect_experiment(cfg: &ExperimentConfig, e: Experiment) -> Result<()> {
    if cfg.experiment != e {
        return Err(Error::Config(format!("expected a {} config, got {}", e.name(), cfg.experiment.name())));
    }
    cfg.validate()
}

/// Per-sample matrix source for the configured ensemble.
struct Sampler<'a> {
    cfg: &'a ExperimentConfig,
    profile: Option<VarianceProfile>,
}

impl<'a> Sampler<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        let profile = match cfg.ensemble {
            Ensemble::Goe => None,
            Ensemble::Wigner(_) if cfg.profile_spread == 0.0 => Some(VarianceProfile::flat(cfg.n)?),
            Ensemble::Wigner(_) => {
                Some(build_variance_profile(cfg.n, cfg.profile_spread, derive_seed(cfg.seed, Domain::Profile, 0))?)
            }
        };
        Ok(Self { cfg, profile })
    }

    fn seed(&self, i: usize) -> u64 {
        derive_seed(self.cfg.seed, Domain::Matrix, i as u64)
    }

    /// Ensemble draw for sample `i`, before any OU evolution.
    fn initial(&self, i: usize) -> Result<SymmetricMatrix> {
        match (self.cfg.ensemble, &self.profile) {
            (Ensemble::Wigner(dist), Some(p)) => sample_wigner(p, dist, self.seed(i)),
            _ => sample_goe(self.cfg.n, self.seed(i)),
        }
    }

    /// Sample `i` after the configured OU time.
    fn matrix(&self, i: usize) -> Result<SymmetricMatrix> {
        ou_interpolate(&self.initial(i)?, self.cfg.ou_time, self.seed(i))
    }
}

fn build_family(cfg: &ExperimentConfig) -> Result<TestFamily> {
    let m = cfg.set_size_value();
    match cfg.family {
        FamilyKind::Coord => coordinate_family(cfg.n, &(0..m).collect::<Vec<_>>()),
        FamilyKind::Random => random_family(cfg.n, m, cfg.seed),
    }
}

/// Rows for `0..count` computed in parallel and returned in index order.
fn par_rows(count: usize, f: impl Fn(usize) -> Result<SampleRow> + Sync + Send) -> Result<Vec<SampleRow>> {
    (0..count).into_par_iter().map(f).collect()
}

fn finish(cfg: &ExperimentConfig, columns: &[&str], rows: Vec<SampleRow>, start: Instant) -> Result<RunRecord> {
    let (summary, gates) = summarize(cfg, &rows)?;
    Ok(RunRecord {
        config: cfg.clone(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
        summary,
        gates,
        wall_time_s: start.elapsed().as_secs_f64(),
        versions: Versions::default(),
    })
}

/// Rows `[value, threshold, sense]` of a check table; `sense = 1` asks for
/// `value <= threshold`, `sense = -1` for `value >= threshold`.
fn check_row(index: usize, seed: u64, value: f64, threshold: f64, at_most: bool) -> SampleRow {
    SampleRow { sample_index: index, seed, values: vec![value, threshold, if at_most { 1.0 } else { -1.0 }] }
}

const CHECK_COLUMNS: [&str; 3] = ["value", "threshold", "sense"];

fn check_summary(rows: &[SampleRow], names: &[&str]) -> (Summary, Vec<Gate>) {
    let mut summary = Summary::default();
    let mut gates = Vec::new();
    for r in rows {
        let name = names.get(r.sample_index).copied().unwrap_or("unknown");
        let (value, threshold) = (r.values[0], r.values[1]);
        summary.stats.push(Stat::new(name, value));
        gates.push(if r.values[2] > 0.0 {
            Gate::at_most(name, value, threshold)
        } else {
            Gate::at_least(name, value, threshold)
        });
    }
    (summary, gates)
}
