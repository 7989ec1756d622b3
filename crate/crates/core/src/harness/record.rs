//! Run records: per-sample rows, derived summaries and gates.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

/// One persisted row: sample (or instance) index, its seed and the
/// statistic columns named in [`RunRecord::columns`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample_index: usize,
    pub seed: u64,
    pub values: Vec<f64>,
}

/// A summary statistic. `se` is `None` when it is undefined (one sample).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub name: String,
    pub value: f64,
    pub se: Option<f64>,
    pub target: Option<f64>,
}

impl Stat {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, se: None, target: None }
    }

    pub fn with_se(mut self, se: Option<f64>) -> Self {
        self.se = se;
        self
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }
}

/// A pass/fail criterion evaluated on the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Gate {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            detail: format!("{value:.6e} <= {threshold:.6e}"),
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
            detail: format!("{value:.6e} >= {threshold:.6e}"),
        }
    }

    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: false, value: 0.0, threshold: 0.0, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub stats: Vec<Stat>,
    pub notes: Vec<String>,
}

impl Summary {
    pub fn get(&self, name: &str) -> Option<&Stat> {
        self.stats.iter().find(|s| s.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub eigenmass: String,
    pub faer: String,
}

impl Default for Versions {
    fn default() -> Self {
        Self { eigenmass: env!("CARGO_PKG_VERSION").into(), faer: "0.24".into() }
    }
}

/// Everything a run produces. Apart from `wall_time_s`, the record is a
/// pure function of the config.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<SampleRow>,
    pub summary: Summary,
    pub gates: Vec<Gate>,
    pub wall_time_s: f64,
    pub versions: Versions,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    /// Values of one named column across rows.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    /// Equality ignoring the wall time.
    pub fn same_results(&self, other: &RunRecord) -> bool {
        self.config == other.config
            && self.columns == other.columns
            && self.rows == other.rows
            && self.summary == other.summary
            && gates_equal(&self.gates, &other.gates)
    }
}

fn gates_equal(a: &[Gate], b: &[Gate]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.name == y.name
                && x.passed == y.passed
                && x.detail == y.detail
                && x.value.to_bits() == y.value.to_bits()
                && x.threshold.to_bits() == y.threshold.to_bits()
        })
}
