//! Rolling-mean line charts (hand-written SVG) and a combined summary for a
//! set of finished runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::{write_json_atomic, RunSummary, Series, SCHEMA_VERSION, SERIES_CSV, SUMMARY_JSON};
use crate::error::{config, Result};
use crate::metrics::rolling_mean;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
/// Points kept per line after thinning.
const MAX_POINTS: usize = 2_000;
const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub label: String,
    pub ys: Vec<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(x: f64) -> String {
    if x.abs() >= 1000.0 || x == x.trunc() {
        format!("{x:.0}")
    } else {
        format!("{x:.2}")
    }
}

/// A line chart with the episode index on the x axis.
pub fn line_chart_svg(title: &str, y_label: &str, lines: &[Line]) -> String {
    let n = lines.iter().map(|l| l.ys.len()).max().unwrap_or(0).max(1);
    let finite = lines.iter().flat_map(|l| l.ys.iter().copied()).filter(|y| y.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let x_of = |i: usize| MARGIN_L + plot_w * i as f64 / (n.saturating_sub(1)).max(1) as f64;
    let y_of = |y: f64| MARGIN_T + plot_h * (1.0 - (y - lo) / (hi - lo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for t in 0..=4 {
        let y = lo + (hi - lo) * t as f64 / 4.0;
        let py = y_of(y);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            MARGIN_L + plot_w,
            MARGIN_L - 6.0,
            py + 4.0,
            tick_label(y)
        );
        let i = ((n - 1) as f64 * t as f64 / 4.0).round() as usize;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x_of(i),
            MARGIN_T + plot_h + 18.0,
            i + 1
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">episode</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        escape(y_label)
    );
    for (k, line) in lines.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let stride = line.ys.len().div_ceil(MAX_POINTS).max(1);
        let mut pts = String::new();
        for (i, y) in line.ys.iter().enumerate() {
            if (i % stride == 0 || i + 1 == line.ys.len()) && y.is_finite() {
                let _ = write!(pts, "{:.1},{:.1} ", x_of(i), y_of(*y));
            }
        }
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
        let ly = MARGIN_T + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(&line.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRun {
    pub label: String,
    pub dir: PathBuf,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub window: usize,
    pub runs: Vec<ReportRun>,
    pub plots: Vec<PathBuf>,
}

/// Finds run directories: `dir` itself if it holds a summary, otherwise its
/// immediate subdirectories that do (sorted by name).
pub fn discover_runs(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.join(SUMMARY_JSON).is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(SUMMARY_JSON).is_file())
        .collect();
    out.sort();
    Ok(out)
}

fn run_label(dir: &Path, summary: &RunSummary) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .filter(|n| !n.is_empty() && n != ".")
        .unwrap_or_else(|| summary.rule.to_string())
}

/// Reads each run's summary and series, writes `learning_ratio.svg`,
/// `revenue.svg`, `efficiency.svg` and `report.json` into `out`.
pub fn report(run_dirs: &[PathBuf], out: &Path, window: Option<usize>) -> Result<Report> {
    if run_dirs.is_empty() {
        return Err(config("no finished runs to report on"));
    }
    let mut runs = Vec::new();
    let mut series = Vec::new();
    for dir in run_dirs {
        let summary = RunSummary::read(&dir.join(SUMMARY_JSON))?;
        series.push(Series::read_csv(&dir.join(SERIES_CSV))?);
        runs.push(ReportRun { label: run_label(dir, &summary), dir: dir.clone(), summary });
    }
    let window = window.unwrap_or_else(|| runs.iter().map(|r| r.summary.config.window()).max().unwrap_or(1));
    fs::create_dir_all(out)?;
    let charts: [(&str, &str, &str, fn(&Series) -> &Vec<f64>); 3] = [
        ("learning_ratio.svg", "Mean learning ratio", "learning ratio", |s| &s.learning_ratio),
        ("revenue.svg", "Revenue", "revenue", |s| &s.revenue),
        ("efficiency.svg", "Efficiency ratio", "efficiency (%)", |s| &s.efficiency_ratio),
    ];
    let mut plots = Vec::new();
    for (file, title, y_label, pick) in charts {
        let lines: Vec<Line> = runs
            .iter()
            .zip(&series)
            .map(|(r, s)| Line { label: r.label.clone(), ys: rolling_mean(pick(s), window) })
            .collect();
        let path = out.join(file);
        fs::write(&path, line_chart_svg(&format!("{title} (rolling mean, window {window})"), y_label, &lines))?;
        plots.push(path);
    }
    let rep = Report { schema_version: SCHEMA_VERSION, window, runs, plots };
    write_json_atomic(&out.join("report.json"), &rep)?;
    Ok(rep)
}
