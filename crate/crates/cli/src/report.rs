//! CSV rendering of power reports: one flat record per cell plus the
//! plot-ready summary table (dimension on x, group average on y).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::experiment::PowerReport;

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn cells_csv(report: &PowerReport) -> String {
    let mut out = String::from("test,distribution,n,d,alpha,n_E,reject_rate,std_dev,status\n");
    for c in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.test,
            csv_field(&c.distribution),
            c.size,
            c.dim,
            c.alpha,
            c.repetitions,
            opt(c.reject_rate),
            opt(c.std_dev),
            csv_field(&c.status),
        ));
    }
    out
}

pub fn summary_csv(report: &PowerReport) -> String {
    let mut out = String::from("test,group,n,d,value,distributions\n");
    for s in &report.summary {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.test, s.group, s.size, s.dim, s.value, s.distributions,
        ));
    }
    out
}

/// Writes `cells.csv` and `summary.csv` under `dir`, creating it first.
pub fn write_report(report: &PowerReport, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let cells_path = dir.join("cells.csv");
    let summary_path = dir.join("summary.csv");
    fs::write(&cells_path, cells_csv(report))?;
    fs::write(&summary_path, summary_csv(report))?;
    Ok((cells_path, summary_path))
}

/// Short human-readable rendering for stdout.
pub fn render_text(report: &PowerReport) -> String {
    let mut out = String::new();
    out.push_str("cell results\n");
    for c in &report.cells {
        match c.reject_rate {
            Some(rate) => out.push_str(&format!(
                "  {:>2} {:<24} n={:<6} d={:<4} reject_rate={:.4} (sd {:.4}, n_E {})\n",
                c.test.to_string(),
                c.distribution,
                c.size,
                c.dim,
                rate,
                c.std_dev.unwrap_or(0.0),
                c.repetitions,
            )),
            None => out.push_str(&format!(
                "  {:>2} {:<24} n={:<6} d={:<4} {}\n",
                c.test.to_string(),
                c.distribution,
                c.size,
                c.dim,
                c.status,
            )),
        }
    }
    if !report.summary.is_empty() {
        out.push_str("group averages (normal: 1 - reject rate, nonnormal: reject rate)\n");
        for s in &report.summary {
            out.push_str(&format!(
                "  {:>2} {:<10} n={:<6} d={:<4} value={:.4} over {} distribution(s)\n",
                s.test.to_string(),
                s.group.to_string(),
                s.size,
                s.dim,
                s.value,
                s.distributions,
            ));
        }
    }
    out
}
