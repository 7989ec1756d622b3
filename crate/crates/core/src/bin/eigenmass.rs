//! Command-line front end for the experiment harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eigenmass::greenreg::RegParams;
use eigenmass::harness::{self, Ensemble, Experiment, ExperimentConfig, FamilyKind, IndexRule, OutputFormat, SetSize};

#[derive(Parser)]
#[command(name = "eigenmass", version, about = "Eigenvector mass fluctuation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moments of the standardized eigenvector mass.
    Clt(Common),
    /// Suprema of the rescaled overlaps.
    Que(Common),
    /// Deterministic identities with residual thresholds.
    IdentitySuite(Common),
    /// Generator-versus-flow residuals on random instances.
    FlowCheck(Common),
    /// Diagnostics along the OU family and SDE integrator checks.
    Dbm(Common),
    /// Regularized observables against the sharp ones.
    RegCompare(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Coord,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Integer or "N^alpha".
    #[arg(long)]
    set_size: Option<SetSize>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// goe, wigner:gaussian, wigner:rademacher or wigner:uniform.
    #[arg(long)]
    ensemble: Option<Ensemble>,
    #[arg(long)]
    profile_spread: Option<f64>,
    #[arg(long)]
    ou_time: Option<f64>,
    /// bulk, edge or a 1-based index.
    #[arg(long)]
    index: Option<IndexRule>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; without it only the summary is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Regularization exponent delta2 (reg-compare).
    #[arg(long)]
    delta2: Option<f64>,
    /// Regularization exponent epsilon2 (reg-compare).
    #[arg(long)]
    epsilon2: Option<f64>,
    /// Comma-separated OU times (dbm).
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
}

impl Common {
    fn resolve(self, experiment: Experiment) -> eigenmass::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_overlay(experiment, &std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::defaults_for(experiment),
        };
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.set_size {
            cfg.set_size = v;
        }
        if let Some(v) = self.family {
            cfg.family = match v {
                FamilyArg::Coord => FamilyKind::Coord,
                FamilyArg::Random => FamilyKind::Random,
            };
        }
        if let Some(v) = self.ensemble {
            cfg.ensemble = v;
        }
        if let Some(v) = self.profile_spread {
            cfg.profile_spread = v;
        }
        if let Some(v) = self.ou_time {
            cfg.ou_time = v;
        }
        if let Some(v) = self.index {
            cfg.index = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.out {
            cfg.out = Some(v);
        }
        if let Some(v) = self.format {
            cfg.format = match v {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Svg => OutputFormat::Svg,
            };
        }
        cfg.reg = RegParams {
            delta2: self.delta2.unwrap_or(cfg.reg.delta2),
            epsilon2: self.epsilon2.unwrap_or(cfg.reg.epsilon2),
        };
        if let Some(v) = self.times {
            cfg.times = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::Clt(c) => (Experiment::Clt, c),
        Command::Que(c) => (Experiment::Que, c),
        Command::IdentitySuite(c) => (Experiment::IdentitySuite, c),
        Command::FlowCheck(c) => (Experiment::FlowCheck, c),
        Command::Dbm(c) => (Experiment::DbmDiagnostics, c),
        Command::RegCompare(c) => (Experiment::RegularizedCompare, c),
    };
    match execute(experiment, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(experiment: Experiment, common: Common) -> eigenmass::Result<bool> {
    let cfg = common.resolve(experiment)?;
    let records = harness::run(&cfg)?;
    let mut passed = true;
    for (i, record) in records.iter().enumerate() {
        let stem = match (experiment, i) {
            (Experiment::DbmDiagnostics, 1) => "dbm-sde".to_string(),
            _ => experiment.name().to_string(),
        };
        println!("== {stem} (N = {}, {} rows, {:.1} s)", cfg.n, record.rows.len(), record.wall_time_s);
        for s in &record.summary.stats {
            let se = s.se.map_or("undefined".to_string(), |v| format!("{v:.4e}"));
            match s.target {
                Some(t) => println!("  {:<44} {:>14.6e}  se {se}  target {t}", s.name, s.value),
                None => println!("  {:<44} {:>14.6e}", s.name, s.value),
            }
        }
        for note in &record.summary.notes {
            println!("  note: {note}");
        }
        for g in &record.gates {
            println!("  {} {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
        }
        if let Some(dir) = &cfg.out {
            for path in harness::write_record(record, dir, &stem)? {
                println!("  wrote {}", path.display());
            }
        }
        passed &= record.passed();
    }
    Ok(passed)
}
