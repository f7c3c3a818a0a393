//! File formats: matrix CSV, metric tables, SVG heatmaps and run manifests.
//!
//! Everything here is byte-deterministic for a given input, so reruns with
//! the same seed can be compared with `cmp`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{Method, Metric, MetricRow, SummaryRow};
use crate::linalg::DenseMatrix;

/// `rows,cols` header, then one comma-separated line per row.
pub fn matrix_to_csv(m: &DenseMatrix) -> String {
    let mut s = format!("{},{}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn matrix_from_csv(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("bad header {header:?}, expected \"rows,cols\"")))?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!(
            "bad header {header:?}, expected \"rows,cols\""
        )));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (k, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)))?;
        if vals.len() != cols {
            return Err(Error::Parse(format!(
                "line {} has {} values, expected {cols}",
                k + 2,
                vals.len()
            )));
        }
        data.extend(vals);
    }
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {rows} data rows, found {}",
            data.len() / cols.max(1)
        )));
    }
    DenseMatrix::new(rows, cols, data)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    matrix_from_csv(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    Ok(std::fs::write(path, matrix_to_csv(m))?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn key(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const RAW_HEADER: &str =
    "method,alpha,target_delta,xi,samples,realization,re_g,acc_x,re_G,re_H,re_X,iterations,converged,status";

/// Raw per-run table. Wall time is left out so that reruns are
/// byte-identical; see [`timing_csv`].
pub fn metric_rows_csv(rows: &[MetricRow]) -> String {
    let mut s = String::from(RAW_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method.name(),
            key(r.alpha),
            key(r.target_delta),
            opt(r.xi),
            r.samples,
            r.realization,
            opt(r.re_g),
            opt(r.acc_x),
            opt(r.re_gop),
            opt(r.re_hop),
            opt(r.re_x),
            r.iterations,
            r.converged,
            r.status
        );
    }
    s
}

/// Wall time per raw row, matched by position.
pub fn timing_csv(rows: &[MetricRow]) -> String {
    let mut s = String::from("row,method,wall_time\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{:e}", r.method.name(), r.wall_time);
    }
    s
}

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut s = String::from("method,alpha,target_delta,samples,count,failures");
    for m in Metric::ALL {
        let _ = write!(s, ",mean_{0},median_{0}", m.column());
    }
    s.push('\n');
    for r in summary {
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            r.method.name(),
            key(r.alpha),
            key(r.target_delta),
            r.samples,
            r.count,
            r.failures
        );
        for m in Metric::ALL {
            let _ = write!(s, ",{},{}", opt(r.mean_of(m)), opt(r.median_of(m)));
        }
        s.push('\n');
    }
    s
}

pub fn emit_csv(rows: &[MetricRow], path: &Path) -> Result<()> {
    Ok(std::fs::write(path, metric_rows_csv(rows))?)
}

/// Grid of values in [0, 1] for one panel; `None` marks an empty cell.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapPanel {
    pub title: String,
    pub cells: Vec<Vec<Option<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub row_label: String,
    pub col_label: String,
    pub row_ticks: Vec<String>,
    pub col_ticks: Vec<String>,
    pub panels: Vec<HeatmapPanel>,
}

fn first_seen<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for it in items {
        if !out.contains(&it) {
            out.push(it);
        }
    }
    out
}

/// Heatmap of a summary table. Test-case-1 tables (with `alpha`) give one
/// panel per method over α × target ‖Δ‖ using cell means; others give a
/// single method × P panel using medians. `re_g` is drawn as `1 − RE_g`.
pub fn heatmap_from_summary(summary: &[SummaryRow], metric: Metric) -> Heatmap {
    let shown = |v: Option<f64>| -> Option<f64> {
        v.map(|x| match metric {
            Metric::AccX => x,
            _ => 1.0 - x,
        })
        .map(|x| x.clamp(0.0, 1.0))
    };
    let what = match metric {
        Metric::AccX => "ACC_X".to_string(),
        m => format!("1 - {}", m.column()),
    };
    let methods = first_seen(summary.iter().map(|r| r.method));
    if summary.iter().any(|r| r.alpha.is_some()) {
        let alphas = first_seen(summary.iter().map(|r| r.alpha.map(f64::to_bits)));
        let deltas = first_seen(summary.iter().map(|r| r.target_delta.map(f64::to_bits)));
        let panels = methods
            .iter()
            .map(|&m| HeatmapPanel {
                title: m.name().to_string(),
                cells: alphas
                    .iter()
                    .map(|&a| {
                        deltas
                            .iter()
                            .map(|&d| {
                                summary
                                    .iter()
                                    .find(|r| {
                                        r.method == m
                                            && r.alpha.map(f64::to_bits) == a
                                            && r.target_delta.map(f64::to_bits) == d
                                    })
                                    .and_then(|r| shown(r.mean_of(metric)))
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        let tick = |b: &Option<u64>| b.map(|x| f64::from_bits(x).to_string()).unwrap_or_default();
        Heatmap {
            title: format!("mean {what}"),
            row_label: "alpha".into(),
            col_label: "target |Delta|_F".into(),
            row_ticks: alphas.iter().map(tick).collect(),
            col_ticks: deltas.iter().map(tick).collect(),
            panels,
        }
    } else {
        let samples = first_seen(summary.iter().map(|r| r.samples));
        let cells = methods
            .iter()
            .map(|&m| {
                samples
                    .iter()
                    .map(|&p| {
                        summary
                            .iter()
                            .find(|r| r.method == m && r.samples == p)
                            .and_then(|r| shown(r.median_of(metric)))
                    })
                    .collect()
            })
            .collect();
        Heatmap {
            title: format!("median {what}"),
            row_label: "method".into(),
            col_label: "P".into(),
            row_ticks: methods
                .iter()
                .map(|m: &Method| m.name().to_string())
                .collect(),
            col_ticks: samples.iter().map(|p| p.to_string()).collect(),
            panels: vec![HeatmapPanel {
                title: String::new(),
                cells,
            }],
        }
    }
}

const CELL_W: usize = 56;
const CELL_H: usize = 28;
const LEFT: usize = 70;
const TOP: usize = 50;
const GAP: usize = 30;
const BOTTOM: usize = 50;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Grayscale heatmap: 0 is black, 1 is white; each cell also prints its value.
pub fn render_heatmap_svg(h: &Heatmap) -> String {
    let nr = h.row_ticks.len();
    let nc = h.col_ticks.len();
    let panel_w = nc * CELL_W;
    let width = LEFT + h.panels.len() * (panel_w + GAP);
    let height = TOP + nr * CELL_H + BOTTOM;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="16" font-size="13" text-anchor="middle">{}</text>"#,
        width / 2,
        escape(&h.title)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        TOP + nr * CELL_H / 2,
        TOP + nr * CELL_H / 2,
        escape(&h.row_label)
    );
    for (pi, panel) in h.panels.iter().enumerate() {
        let x0 = LEFT + pi * (panel_w + GAP);
        if !panel.title.is_empty() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                x0 + panel_w / 2,
                TOP - 10,
                escape(&panel.title)
            );
        }
        for (i, row) in panel.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let (x, y) = (x0 + j * CELL_W, TOP + i * CELL_H);
                match cell {
                    Some(v) => {
                        let g = (v * 255.0).round() as u8;
                        let ink = if *v > 0.5 { "black" } else { "white" };
                        let _ = writeln!(
                            s,
                            r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="rgb({g},{g},{g})" stroke="#888"/><text x="{}" y="{}" text-anchor="middle" fill="{ink}">{v:.3}</text>"##,
                            x + CELL_W / 2,
                            y + CELL_H / 2 + 4
                        );
                    }
                    None => {
                        let _ = writeln!(
                            s,
                            r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="none" stroke="#888"/><text x="{}" y="{}" text-anchor="middle">n/a</text>"##,
                            x + CELL_W / 2,
                            y + CELL_H / 2 + 4
                        );
                    }
                }
            }
        }
        for (j, t) in h.col_ticks.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                x0 + j * CELL_W + CELL_W / 2,
                TOP + nr * CELL_H + 16,
                escape(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + panel_w / 2,
            TOP + nr * CELL_H + 36,
            escape(&h.col_label)
        );
    }
    for (i, t) in h.row_ticks.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 6,
            TOP + i * CELL_H + CELL_H / 2 + 4,
            escape(t)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_heatmap_svg(summary: &[SummaryRow], metric: Metric, path: &Path) -> Result<()> {
    Ok(std::fs::write(
        path,
        render_heatmap_svg(&heatmap_from_summary(summary, metric)),
    )?)
}

/// Run record written next to every set of outputs.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub workers: usize,
    pub full: bool,
    pub parallel_feature: bool,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(std::fs::write(path, text)?)
}
