//! A small configured Monte Carlo run of the standardized mass statistic,
//! persisted as CSV plus a JSON summary.

use eigenmass::harness::{run_clt, write_record, Experiment, ExperimentConfig, SetSize};

pub struct Report {
    pub variance: f64,
    pub files: usize,
    pub passed: bool,
}

pub fn run_example() -> eigenmass::Result<Report> {
    let cfg = ExperimentConfig { n: 200, set_size: SetSize::Power(0.5), samples: 400, ..ExperimentConfig::defaults_for(Experiment::Clt) };
    let rec = run_clt(&cfg)?;
    for s in &rec.summary.stats {
        println!("{:<10} {:+.4}  se {:.4}", s.name, s.value, s.se.unwrap_or(f64::NAN));
    }
    for g in &rec.gates {
        println!("{} {}", if g.passed { "PASS" } else { "FAIL" }, g.name);
    }
    let dir = std::env::temp_dir().join("eigenmass-clt-example");
    std::fs::create_dir_all(&dir)?;
    let files = write_record(&rec, &dir, "clt")?;
    println!("wrote {} files to {}", files.len(), dir.display());
    let variance = rec.summary.get("variance").map_or(f64::NAN, |s| s.value);
    Ok(Report { variance, files: files.len(), passed: rec.passed() })
}

#[allow(dead_code)]
fn main() -> eigenmass::Result<()> {
    run_example().map(|_| ())
}
