//! `recon.csv`, `report.json` and one SVG plot per noise level.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::experiment::ExperimentReport;
use crate::error::{Error, Result};

fn level_tag(level: f64) -> String {
    format!("{level}")
}

pub fn csv_header(report: &ExperimentReport) -> Vec<String> {
    let mut h = vec!["x".to_string(), "truth".to_string()];
    for l in &report.levels {
        let tag = level_tag(l.level);
        h.push(format!("recon_{tag}"));
        h.push(format!("error_{tag}"));
    }
    h
}

pub fn write_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(csv_header(report))
        .map_err(|e| Error::csv(path, e))?;
    for (i, x) in report.x.iter().enumerate() {
        let mut row = vec![format!("{x:.17e}"), format!("{:.17e}", report.truth[i])];
        for l in &report.levels {
            let v = l.estimate[i];
            row.push(format!("{v:.17e}"));
            row.push(format!("{:.17e}", v - report.truth[i]));
        }
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Line plot of the truth (black) and the estimate (red) against `x`.
pub fn svg_plot(x: &[f64], truth: &[f64], estimate: &[f64], title: &str) -> String {
    let (w, h, pad) = (640.0, 400.0, 48.0);
    let lo = truth
        .iter()
        .chain(estimate)
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = truth
        .iter()
        .chain(estimate)
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let (lo, hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else {
        (-1.0, 1.0)
    };
    let (x0, x1) = (
        x.first().copied().unwrap_or(-1.0),
        x.last().copied().unwrap_or(1.0),
    );
    let sx = |v: f64| pad + (v - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - (v - lo) / (hi - lo) * (h - 2.0 * pad);
    let line = |ys: &[f64]| {
        x.iter()
            .zip(ys)
            .map(|(&a, &b)| format!("{:.2},{:.2}", sx(a), sy(b)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="28" font-family="sans-serif" font-size="15" text-anchor="middle">{title}</text>"#,
        w / 2.0
    );
    for (v, y) in [(lo, h - pad), (hi, pad)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.3}</text>"#,
            pad - 4.0,
            y + 4.0
        );
    }
    for (v, xx) in [(x0, pad), (x1, w - pad)] {
        let _ = writeln!(
            s,
            r#"<text x="{xx}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{v}</text>"#,
            h - pad + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
        line(truth)
    );
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#d62728" stroke-width="1.2" stroke-dasharray="5,3" points="{}"/>"##,
        line(estimate)
    );
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="black">truth</text><text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="#d62728">reconstruction</text>"##,
        pad + 8.0,
        pad + 16.0,
        pad + 48.0,
        pad + 16.0
    );
    s.push_str("</svg>\n");
    s
}

/// Writes the report files into `dir` and returns their paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let csv_path = dir.join("recon.csv");
    write_csv(report, &csv_path)?;
    written.push(csv_path);

    let json_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Format {
        path: json_path.clone(),
        msg: e.to_string(),
    })?;
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    written.push(json_path);

    for l in &report.levels {
        let path = dir.join(format!("recon_{}.svg", level_tag(l.level)));
        let title = format!(
            "Experiment {}: noise {}%, relative error {:.2}%",
            report.id,
            l.level * 100.0,
            l.median_error * 100.0
        );
        std::fs::write(
            &path,
            svg_plot(&report.x, &report.truth, &l.estimate, &title),
        )
        .map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
