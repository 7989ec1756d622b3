//! Persistence: CSV rows, JSON summaries and SVG histograms.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::record::{Gate, RunRecord, SampleRow, Summary, Versions};
use super::{Experiment, ExperimentConfig, OutputFormat};
use crate::{Error, Result};

/// Writes `sample_index, seed, <columns>` rows.
pub fn write_rows_csv(path: &Path, columns: &[String], rows: &[SampleRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["sample_index".to_string(), "seed".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.sample_index.to_string(), r.seed.to_string()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_rows_csv`]; returns the statistic columns.
pub fn read_rows_csv(path: &Path) -> Result<(Vec<String>, Vec<SampleRow>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "sample_index" || &header[1] != "seed" {
        return Err(Error::Config(format!("{} is not a rows file", path.display())));
    }
    let columns = header.iter().skip(2).map(str::to_string).collect();
    let bad = |e: &dyn std::fmt::Display| Error::Config(format!("{}: {e}", path.display()));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let sample_index = rec[0].parse().map_err(|e| bad(&e))?;
        let seed = rec[1].parse().map_err(|e| bad(&e))?;
        let values = rec.iter().skip(2).map(|v| v.parse::<f64>().map_err(|e| bad(&e))).collect::<Result<_>>()?;
        rows.push(SampleRow { sample_index, seed, values });
    }
    Ok((columns, rows))
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    config: &'a ExperimentConfig,
    columns: &'a [String],
    samples: usize,
    summary: &'a Summary,
    gates: &'a [Gate],
    passed: bool,
    wall_time_s: f64,
    versions: &'a Versions,
}

/// Writes `<stem>.summary.json` and, by format, `<stem>.csv` (rows),
/// `<stem>.json` (full record) or `<stem>.csv` plus `<stem>.svg`.
pub fn write_record(record: &RunRecord, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summary = SummaryFile {
        config: &record.config,
        columns: &record.columns,
        samples: record.rows.len(),
        summary: &record.summary,
        gates: &record.gates,
        passed: record.passed(),
        wall_time_s: record.wall_time_s,
        versions: &record.versions,
    };
    let path = dir.join(format!("{stem}.summary.json"));
    fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
    written.push(path);
    match record.config.format {
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            fs::write(&path, serde_json::to_string_pretty(record)?)?;
            written.push(path);
        }
        OutputFormat::Csv | OutputFormat::Svg => {
            let path = dir.join(format!("{stem}.csv"));
            write_rows_csv(&path, &record.columns, &record.rows)?;
            written.push(path);
        }
    }
    if record.config.format == OutputFormat::Svg {
        let name = histogram_column(record);
        if let Some(values) = record.column(name) {
            let path = dir.join(format!("{stem}.svg"));
            fs::write(&path, histogram_svg(&values, &format!("{stem}: {name}"), 40))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn histogram_column(record: &RunRecord) -> &'static str {
    match record.config.experiment {
        Experiment::Clt => "statistic",
        Experiment::Que => "sup_all",
        Experiment::RegularizedCompare => "abs_diff",
        Experiment::FlowCheck => "relative",
        Experiment::IdentitySuite => "value",
        Experiment::DbmDiagnostics if record.columns.len() > 3 => "bulk_gap",
        Experiment::DbmDiagnostics => "value",
    }
}

/// A self-contained SVG bar chart of `values` in `bins` equal bins.
pub fn histogram_svg(values: &[f64], title: &str, bins: usize) -> String {
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    if !finite.is_empty() {
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        for v in &finite {
            counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar = (w - 2.0 * pad) / bins as f64;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    for (i, &c) in counts.iter().enumerate() {
        let bh = (h - 2.0 * pad) * c as f64 / top;
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4477aa"/>"##,
            pad + i as f64 * bar,
            h - pad - bh,
            (bar - 1.0).max(0.5),
            bh
        );
    }
    let _ = writeln!(svg, r#"<line x1="{pad}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#, h - pad, w - pad);
    for (x, v) in [(pad, lo), (w - pad, hi)] {
        let label = if v.is_finite() { format!("{v:.3}") } else { "-".into() };
        let _ = writeln!(svg, r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{label}</text>"#, h - pad + 16.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">n = {}</text>"#, w / 2.0, h - 8.0, finite.len());
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
