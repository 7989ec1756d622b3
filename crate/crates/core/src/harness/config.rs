//! Experiment configuration: JSON file, CLI overlay and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensembles::EntryDistribution;
use crate::greenreg::RegParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Clt,
    Que,
    IdentitySuite,
    FlowCheck,
    DbmDiagnostics,
    RegularizedCompare,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Clt => "clt",
            Experiment::Que => "que",
            Experiment::IdentitySuite => "identity-suite",
            Experiment::FlowCheck => "flow-check",
            Experiment::DbmDiagnostics => "dbm-diagnostics",
            Experiment::RegularizedCompare => "regularized-compare",
        }
    }
}

/// `|I|` either as an absolute count or as `floor(N^alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Scalar", into = "Scalar")]
pub enum SetSize {
    Absolute(usize),
    Power(f64),
}

impl SetSize {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            SetSize::Absolute(m) => m,
            // The nudge keeps exact powers such as 400^0.5 from rounding down.
            SetSize::Power(a) => ((n as f64).powf(a) * (1.0 + 1e-12)).floor() as usize,
        }
    }
}

impl FromStr for SetSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix("N^").or_else(|| t.strip_prefix("n^")) {
            let a: f64 = rest
                .parse()
                .map_err(|_| Error::Config(format!("bad set-size exponent in {s:?}")))?;
            return Ok(SetSize::Power(a));
        }
        t.parse()
            .map(SetSize::Absolute)
            .map_err(|_| Error::Config(format!("set size must be an integer or \"N^alpha\", got {s:?}")))
    }
}

impl fmt::Display for SetSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSize::Absolute(m) => write!(f, "{m}"),
            SetSize::Power(a) => write!(f, "N^{a}"),
        }
    }
}

/// Which eigenvector the per-sample statistic looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Scalar", into = "Scalar")]
pub enum IndexRule {
    /// `k = floor(N/2)`.
    Bulk,
    /// `k = 1`.
    Edge,
    /// Explicit 1-based index.
    Explicit(usize),
}

impl IndexRule {
    /// 0-based index.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            IndexRule::Bulk => n / 2 - 1,
            IndexRule::Edge => 0,
            IndexRule::Explicit(k) => k - 1,
        }
    }
}

impl FromStr for IndexRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bulk" => Ok(IndexRule::Bulk),
            "edge" => Ok(IndexRule::Edge),
            t => t
                .parse()
                .map(IndexRule::Explicit)
                .map_err(|_| Error::Config(format!("index must be bulk, edge or a 1-based integer, got {s:?}"))),
        }
    }
}

impl fmt::Display for IndexRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexRule::Bulk => write!(f, "bulk"),
            IndexRule::Edge => write!(f, "edge"),
            IndexRule::Explicit(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Scalar", into = "Scalar")]
pub enum Ensemble {
    Goe,
    Wigner(EntryDistribution),
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "goe" => Ok(Ensemble::Goe),
            "wigner" | "wigner:gaussian" => Ok(Ensemble::Wigner(EntryDistribution::Gaussian)),
            "wigner:rademacher" => Ok(Ensemble::Wigner(EntryDistribution::Rademacher)),
            "wigner:uniform" => Ok(Ensemble::Wigner(EntryDistribution::Uniform)),
            _ => Err(Error::Config(format!(
                "ensemble must be goe, wigner:gaussian, wigner:rademacher or wigner:uniform, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ensemble::Goe => write!(f, "goe"),
            Ensemble::Wigner(EntryDistribution::Gaussian) => write!(f, "wigner:gaussian"),
            Ensemble::Wigner(EntryDistribution::Rademacher) => write!(f, "wigner:rademacher"),
            Ensemble::Wigner(EntryDistribution::Uniform) => write!(f, "wigner:uniform"),
        }
    }
}

/// JSON scalar accepted for the string-or-integer fields.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(usize),
    Str(String),
}

macro_rules! scalar_conversions {
    ($t:ty, $int:expr) => {
        impl TryFrom<Scalar> for $t {
            type Error = Error;
            fn try_from(s: Scalar) -> Result<Self> {
                match s {
                    Scalar::Int(k) => $int(k),
                    Scalar::Str(t) => t.parse(),
                }
            }
        }
        impl From<$t> for Scalar {
            fn from(v: $t) -> Self {
                match v.to_string().parse::<usize>() {
                    Ok(k) => Scalar::Int(k),
                    Err(_) => Scalar::Str(v.to_string()),
                }
            }
        }
    };
}

scalar_conversions!(SetSize, |k| Ok(SetSize::Absolute(k)));
scalar_conversions!(IndexRule, |k| Ok(IndexRule::Explicit(k)));
scalar_conversions!(Ensemble, |k: usize| Err(Error::Config(format!("ensemble must be a string, got {k}"))));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// Standard basis vectors `e_1, ..., e_|I|`.
    Coord,
    /// Orthonormalized Gaussian vectors.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

/// Full description of one run. Every field has a default, so a config
/// file only needs the keys it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub set_size: SetSize,
    pub family: FamilyKind,
    pub ensemble: Ensemble,
    /// `0` gives the flat profile `1/N`.
    pub profile_spread: f64,
    /// OU time applied to every sample; `0` leaves the ensemble unchanged.
    pub ou_time: f64,
    pub index: IndexRule,
    /// Monte Carlo samples, or random instances per kind for `flow-check`.
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Regularization exponents for `regularized-compare`.
    pub reg: RegParams,
    /// Exponents `eps` whose exceedance fractions `P(sup > N^eps)` are reported by `que`.
    pub epsilon_grid: Vec<f64>,
    /// OU times visited by `dbm-diagnostics`.
    pub times: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults_for(Experiment::Clt)
    }
}

impl ExperimentConfig {
    /// Defaults sized for each experiment's reference scenario.
    pub fn defaults_for(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            n: 800,
            set_size: SetSize::Power(0.5),
            family: FamilyKind::Coord,
            ensemble: Ensemble::Goe,
            profile_spread: 0.0,
            ou_time: 0.0,
            index: IndexRule::Bulk,
            samples: 4000,
            seed: 2024,
            out: None,
            format: OutputFormat::Csv,
            reg: RegParams::default(),
            epsilon_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            times: vec![0.25, 0.5, 1.0],
        };
        match experiment {
            Experiment::Clt => base,
            Experiment::Que => Self { n: 500, samples: 200, ..base },
            Experiment::IdentitySuite => Self { n: 60, set_size: SetSize::Absolute(8), samples: 1, ..base },
            Experiment::FlowCheck => Self { n: 12, set_size: SetSize::Absolute(4), family: FamilyKind::Random, samples: 50, ..base },
            Experiment::DbmDiagnostics => Self { n: 400, set_size: SetSize::Absolute(20), samples: 100, ..base },
            Experiment::RegularizedCompare => Self { n: 400, set_size: SetSize::Absolute(20), samples: 100, ..base },
        }
    }

    /// Defaults for `experiment` overlaid with the keys present in a JSON
    /// object. An `experiment` key, if present, must agree.
    pub fn from_json_overlay(experiment: Experiment, json: &str) -> Result<Self> {
        let file: serde_json::Value = serde_json::from_str(json)?;
        let serde_json::Value::Object(file) = file else {
            return Err(Error::Config("config file must hold a JSON object".into()));
        };
        let mut merged = serde_json::to_value(Self::defaults_for(experiment))?;
        let target = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in file {
            target.insert(k, v);
        }
        let cfg: Self = serde_json::from_value(merged)?;
        if cfg.experiment != experiment {
            return Err(Error::Config(format!(
                "config file is for {}, but {} was requested",
                cfg.experiment.name(),
                experiment.name()
            )));
        }
        Ok(cfg)
    }

    pub fn set_size_value(&self) -> usize {
        self.set_size.resolve(self.n)
    }

    /// Checks every invariant; runs call this before drawing any sample.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n < 2 {
            return fail(format!("N must be at least 2, got {}", self.n));
        }
        if let SetSize::Power(a) = self.set_size {
            if !(a > 0.0 && a < 1.0) {
                return fail(format!("set-size exponent must lie in (0, 1), got {a}"));
            }
        }
        let m = self.set_size_value();
        if m < 1 || m > self.n {
            return fail(format!("|I| = {m} must lie in [1, N = {}]", self.n));
        }
        if self.samples < 1 {
            return fail("samples must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.profile_spread) {
            return fail(format!("profile spread must lie in [0, 1), got {}", self.profile_spread));
        }
        if !(self.ou_time >= 0.0 && self.ou_time.is_finite()) {
            return fail(format!("OU time must be finite and >= 0, got {}", self.ou_time));
        }
        if let IndexRule::Explicit(k) = self.index {
            if k < 1 || k > self.n {
                return fail(format!("index {k} must lie in [1, N = {}]", self.n));
            }
        }
        self.reg.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.epsilon_grid.iter().any(|e| !e.is_finite()) {
            return fail("epsilon grid must be finite".into());
        }
        if self.experiment == Experiment::DbmDiagnostics
            && (self.times.is_empty() || self.times.iter().any(|&t| !(t > 0.0 && t.is_finite())))
        {
            return fail("dbm times must be a non-empty list of positive numbers".into());
        }
        if self.experiment == Experiment::FlowCheck && self.set_size_value() < 4 {
            return fail("flow-check needs a family of at least 4 vectors".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars() {
        assert_eq!("N^0.5".parse::<SetSize>().unwrap(), SetSize::Power(0.5));
        assert_eq!("20".parse::<SetSize>().unwrap(), SetSize::Absolute(20));
        assert!("N^x".parse::<SetSize>().is_err());
        assert_eq!(SetSize::Power(0.5).resolve(400), 20);
        assert_eq!(SetSize::Power(0.5).resolve(800), 28);
        assert_eq!("edge".parse::<IndexRule>().unwrap().resolve(10), 0);
        assert_eq!("bulk".parse::<IndexRule>().unwrap().resolve(10), 4);
        assert_eq!("3".parse::<IndexRule>().unwrap().resolve(10), 2);
        assert_eq!("wigner:uniform".parse::<Ensemble>().unwrap(), Ensemble::Wigner(EntryDistribution::Uniform));
        assert!("gue".parse::<Ensemble>().is_err());
    }

    #[test]
    fn json_round_trip_and_overlay() {
        let cfg = ExperimentConfig::defaults_for(Experiment::Que);
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"set_size\":\"N^0.5\""));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&s).unwrap(), cfg);
        let o = ExperimentConfig::from_json_overlay(Experiment::Que, r#"{"n": 50, "index": 7, "ensemble": "wigner:rademacher"}"#).unwrap();
        assert_eq!(o.n, 50);
        assert_eq!(o.index, IndexRule::Explicit(7));
        assert_eq!(o.samples, 200);
        assert!(ExperimentConfig::from_json_overlay(Experiment::Que, r#"{"experiment": "clt"}"#).is_err());
        assert!(ExperimentConfig::from_json_overlay(Experiment::Que, r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        let ok = ExperimentConfig::defaults_for(Experiment::Clt);
        assert!(ok.validate().is_ok());
        for bad in [
            ExperimentConfig { n: 1, ..ok.clone() },
            ExperimentConfig { samples: 0, ..ok.clone() },
            ExperimentConfig { set_size: SetSize::Power(1.0), ..ok.clone() },
            ExperimentConfig { set_size: SetSize::Absolute(0), ..ok.clone() },
            ExperimentConfig { set_size: SetSize::Absolute(801), ..ok.clone() },
            ExperimentConfig { index: IndexRule::Explicit(0), ..ok.clone() },
            ExperimentConfig { profile_spread: 1.0, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }
}
