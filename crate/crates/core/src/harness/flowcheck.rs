//! Generator-versus-flow residual tables over random instances.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use super::record::{Gate, RunRecord, SampleRow, Stat, Summary};
use super::{expect_experiment, finish, par_rows, Experiment, ExperimentConfig};
use crate::flowlab::{generator_flow_residual, random_instance, FlowKind, FlowObservable, DEFAULT_STEP};
use crate::matchings::{FourLabels, ParticleConfiguration};
use crate::rng::{derive_seed, rng_from_seed, Domain};
use crate::stats::median;
use crate::Result;

/// Kinds in row order; the `kind` column holds the position in this list.
pub const FLOW_KINDS: [FlowKind; 5] =
    [FlowKind::GPairs, FlowKind::G4, FlowKind::H4, FlowKind::FMatching, FlowKind::Constant];

const RELATIVE_TOL: f64 = 1e-5;
const CONSTANT_TOL: f64 = 1e-8;
const MAX_PARTICLES: usize = 3;

/// `cfg.samples` random instances per kind at dimension `cfg.n` with a
/// random family of `|I|` vectors. Every fifth `g4`/`h4` instance sits on
/// the diagonal `j = k`.
pub fn run_flow_check(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::FlowCheck)?;
    let start = Instant::now();
    let (n, m, per_kind) = (cfg.n, cfg.set_size_value(), cfg.samples);
    let rows = par_rows(FLOW_KINDS.len() * per_kind, |r| {
        let (kind_id, inst) = (r / per_kind, r % per_kind);
        let seed = derive_seed(cfg.seed, Domain::Instance, r as u64);
        let (s, f) = random_instance(n, m, seed)?;
        let mut rng = rng_from_seed(derive_seed(seed, Domain::Instance, 3));
        let mut picks: Vec<usize> = (0..m).collect();
        picks.shuffle(&mut rng);
        let four = FourLabels::new(picks[0], picks[1], picks[2], picks[3]);
        let mut rng = rng_from_seed(derive_seed(seed, Domain::Instance, 4));
        let j = rng.random_range(0..n);
        let k = if inst % 5 == 0 { j } else { (j + rng.random_range(1..n)) % n };
        let o = match FLOW_KINDS[kind_id] {
            FlowKind::GPairs => {
                let config = random_configuration(&mut rng, n)?;
                let labels = (0..2 * config.total()).map(|_| rng.random_range(0..m)).collect();
                FlowObservable::GPairs { config, labels }
            }
            FlowKind::FMatching => FlowObservable::FMatching { config: random_configuration(&mut rng, n)? },
            FlowKind::G4 => FlowObservable::G4 { labels: four, j, k },
            FlowKind::H4 => FlowObservable::H4 { labels: four, j, k },
            FlowKind::Constant => FlowObservable::Constant(rng.random_range(-2.0..2.0)),
        };
        let res = generator_flow_residual(&o, &s, &f, DEFAULT_STEP)?;
        Ok(SampleRow {
            sample_index: r,
            seed,
            values: vec![kind_id as f64, res.generator, res.rhs, res.absolute, res.relative],
        })
    })?;
    finish(cfg, &["kind", "generator", "rhs", "absolute", "relative"], rows, start)
}

fn random_configuration(rng: &mut impl Rng, n: usize) -> Result<ParticleConfiguration> {
    let total = rng.random_range(1..=MAX_PARTICLES);
    let mut counts = vec![0usize; n];
    for _ in 0..total {
        counts[rng.random_range(0..n)] += 1;
    }
    let sites: Vec<(usize, usize)> = counts.iter().enumerate().filter(|(_, c)| **c > 0).map(|(s, c)| (s, *c)).collect();
    ParticleConfiguration::new(n, &sites)
}

pub(super) fn summarize_flow(rows: &[SampleRow]) -> Result<(Summary, Vec<Gate>)> {
    let mut summary = Summary::default();
    let mut gates = Vec::new();
    for (id, kind) in FLOW_KINDS.iter().enumerate() {
        let of: Vec<&SampleRow> = rows.iter().filter(|r| r.values[0] == id as f64).collect();
        if of.is_empty() {
            continue;
        }
        let name = kind.name();
        let rel: Vec<f64> = of.iter().map(|r| r.values[4]).collect();
        let abs_max = of.iter().map(|r| r.values[3]).fold(0.0f64, f64::max);
        let rel_max = rel.iter().copied().fold(0.0f64, f64::max);
        summary.stats.push(Stat::new(format!("{name} max relative"), rel_max));
        summary.stats.push(Stat::new(format!("{name} median relative"), median(&rel)));
        summary.stats.push(Stat::new(format!("{name} max absolute"), abs_max));
        match kind {
            FlowKind::Constant => gates.push(Gate::at_most(format!("{name} max absolute"), abs_max, CONSTANT_TOL)),
            FlowKind::FMatching => {
                let ratios: Vec<f64> =
                    of.iter().filter(|r| r.values[2].abs() > 1e-12).map(|r| r.values[1] / r.values[2]).collect();
                let ratio = if ratios.is_empty() { 0.0 } else { median(&ratios) };
                let spread = ratios.iter().map(|x| (x - ratio).abs()).fold(0.0f64, f64::max);
                summary.stats.push(Stat::new("f_matching median L f / RHS", ratio));
                summary.stats.push(Stat::new("f_matching max |ratio - median|", spread));
                summary.notes.push(if rel_max <= RELATIVE_TOL {
                    "f_matching pointwise flow: pass".into()
                } else {
                    format!(
                        "f_matching pointwise flow: indeterminate; L f = {ratio:.7} x RHS \
                         (max deviation {spread:.1e}), i.e. the flow holds pointwise only with \
                         the time rescaled by this factor"
                    )
                });
            }
            _ => gates.push(Gate::at_most(format!("{name} max relative"), rel_max, RELATIVE_TOL)),
        }
    }
    Ok((summary, gates))
}
