use std::path::Path;
use std::process::Command;

use eigenmass::harness::*;
use eigenmass::Error;

fn cfg(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig::defaults_for(experiment)
}

fn small_clt() -> ExperimentConfig {
    ExperimentConfig { n: 60, samples: 40, seed: 9, ..cfg(Experiment::Clt) }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn validation_rejects_bad_configs() {
    let base = small_clt();
    let bad = [
        ExperimentConfig { n: 1, ..base.clone() },
        ExperimentConfig { samples: 0, ..base.clone() },
        ExperimentConfig { set_size: SetSize::Absolute(0), ..base.clone() },
        ExperimentConfig { set_size: SetSize::Absolute(61), ..base.clone() },
        ExperimentConfig { set_size: SetSize::Power(1.0), ..base.clone() },
        ExperimentConfig { index: IndexRule::Explicit(0), ..base.clone() },
        ExperimentConfig { index: IndexRule::Explicit(61), ..base.clone() },
        ExperimentConfig { profile_spread: 1.0, ..base.clone() },
        ExperimentConfig { ou_time: -0.5, ..base.clone() },
    ];
    for c in &bad {
        assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        assert!(run(c).is_err());
    }
    assert!(base.validate().is_ok());
    let wrong = ExperimentConfig { experiment: Experiment::Que, ..base };
    assert!(run_clt(&wrong).is_err());
}

#[test]
fn json_overlay_and_unknown_keys() {
    let c = ExperimentConfig::from_json_overlay(Experiment::Que, r#"{"n": 50, "set_size": "N^0.5", "index": 3}"#).unwrap();
    assert_eq!(c.n, 50);
    assert_eq!(c.set_size_value(), 7);
    assert_eq!(c.index, IndexRule::Explicit(3));
    assert_eq!(c.samples, 200);
    assert!(ExperimentConfig::from_json_overlay(Experiment::Que, r#"{"bogus": 1}"#).is_err());
    assert!(ExperimentConfig::from_json_overlay(Experiment::Que, r#"{"experiment": "clt"}"#).is_err());
    assert!(ExperimentConfig::from_json_overlay(Experiment::Que, "[1]").is_err());
}

#[test]
fn runs_are_independent_of_worker_count() {
    let configs = [
        small_clt(),
        ExperimentConfig { n: 40, samples: 12, ..cfg(Experiment::Que) },
        ExperimentConfig { n: 60, samples: 6, ..cfg(Experiment::RegularizedCompare) },
        ExperimentConfig { n: 8, samples: 3, ..cfg(Experiment::FlowCheck) },
    ];
    for c in &configs {
        let one = in_pool(1, || run(c).unwrap());
        let two = in_pool(2, || run(c).unwrap());
        for (a, b) in one.iter().zip(&two) {
            assert!(a.same_results(b), "{}", c.experiment.name());
        }
    }
    let other = run(&ExperimentConfig { seed: 10, ..small_clt() }).unwrap();
    assert_ne!(other[0].rows, run(&small_clt()).unwrap()[0].rows);
}

#[test]
fn summaries_recompute_from_persisted_rows() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        small_clt(),
        ExperimentConfig { n: 40, samples: 10, ..cfg(Experiment::Que) },
        ExperimentConfig { n: 60, samples: 5, ..cfg(Experiment::RegularizedCompare) },
        ExperimentConfig { n: 30, ..cfg(Experiment::IdentitySuite) },
    ];
    for c in &configs {
        let rec = run(c).unwrap().remove(0);
        let path = dir.path().join(format!("{}.csv", c.experiment.name()));
        write_rows_csv(&path, &rec.columns, &rec.rows).unwrap();
        let (columns, rows) = read_rows_csv(&path).unwrap();
        assert_eq!(columns, rec.columns);
        assert_eq!(rows, rec.rows);
        let (summary, gates) = summarize(c, &rows).unwrap();
        assert_eq!(summary, rec.summary);
        assert_eq!(gates.len(), rec.gates.len());
        for (g, h) in gates.iter().zip(&rec.gates) {
            assert_eq!((g.passed, &g.name), (h.passed, &h.name));
            assert_eq!(g.value.to_bits(), h.value.to_bits());
        }
    }
}

#[test]
fn single_sample_clt() {
    let c = ExperimentConfig { samples: 1, ..small_clt() };
    let rec = run_clt(&c).unwrap();
    let x = rec.column("statistic").unwrap()[0];
    let m1 = rec.summary.get("m1").unwrap();
    assert_eq!(m1.value, x);
    assert_eq!(m1.se, None);
    assert!(!rec.summary.notes.is_empty());
    assert!(!rec.passed());
}

#[test]
fn full_family_que_is_zero() {
    let c = ExperimentConfig { n: 30, set_size: SetSize::Absolute(30), samples: 3, ..cfg(Experiment::Que) };
    let rec = run_que(&c).unwrap();
    for col in ["sup_diag", "sup_off", "sup_all"] {
        assert!(rec.column(col).unwrap().iter().all(|v| v.abs() < 1e-10), "{col}");
    }
}

#[test]
fn full_family_regularized_is_zero() {
    let c = ExperimentConfig { n: 30, set_size: SetSize::Absolute(30), samples: 2, ..cfg(Experiment::RegularizedCompare) };
    let rec = run_regularized_compare(&c).unwrap();
    for col in ["q_ll", "hat_p_ll", "v_ll"] {
        assert!(rec.column(col).unwrap().iter().all(|v| v.abs() < 1e-9), "{col}");
    }
}

#[test]
fn identity_suite_passes_and_is_deterministic() {
    let c = ExperimentConfig { n: 30, ..cfg(Experiment::IdentitySuite) };
    let a = run_identity_suite(&c).unwrap();
    assert_eq!(a.rows.len(), IDENTITIES.len());
    assert!(a.passed(), "{:?}", a.gates.iter().filter(|g| !g.passed).collect::<Vec<_>>());
    assert!(a.same_results(&run_identity_suite(&c).unwrap()));
}

#[test]
fn records_are_written_by_format() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig { n: 40, samples: 8, ..cfg(Experiment::Que) };
    let rec = run(&c).unwrap().remove(0);
    let names = |paths: Vec<std::path::PathBuf>| -> Vec<String> {
        paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect()
    };
    let csv = names(write_record(&rec, dir.path(), "a").unwrap());
    assert!(csv.contains(&"a.csv".into()) && csv.contains(&"a.summary.json".into()));
    c.format = OutputFormat::Svg;
    let svg_rec = RunRecord { config: c.clone(), ..rec.clone() };
    let svg = names(write_record(&svg_rec, dir.path(), "b").unwrap());
    assert!(svg.contains(&"b.svg".into()));
    let body = std::fs::read_to_string(dir.path().join("b.svg")).unwrap();
    assert!(body.starts_with("<svg"));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["experiment"], "que");
    assert_eq!(summary["samples"], 8);
}

fn cli(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_eigenmass")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn cli_runs_and_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let ok = cli(&["identity-suite", "--n", "20", "--set-size", "4", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    assert!(out.join("identity-suite.summary.json").exists());
    assert!(out.join("identity-suite.csv").exists());

    // A single CLT sample cannot pass its gates.
    let fail = cli(&["clt", "--n", "30", "--samples", "1"], dir.path());
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL"));

    let err = cli(&["que", "--n", "1"], dir.path());
    assert_eq!(err.status.code(), Some(2));
}

#[test]
fn cli_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("que.json");
    std::fs::write(&file, r#"{"n": 24, "samples": 4, "set_size": 3, "format": "json"}"#).unwrap();
    let out = dir.path().join("o");
    let o = cli(
        &["que", "--config", file.to_str().unwrap(), "--samples", "6", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&o.stderr));
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("que.summary.json")).unwrap()).unwrap();
    assert_eq!(rec["config"]["n"], 24);
    assert_eq!(rec["config"]["set_size"], 3);
    assert_eq!(rec["samples"], 6);
    assert!(out.join("que.json").exists());

    std::fs::write(&file, r#"{"n": 24, "typo": 1}"#).unwrap();
    assert_eq!(cli(&["que", "--config", file.to_str().unwrap()], dir.path()).status.code(), Some(2));
}
