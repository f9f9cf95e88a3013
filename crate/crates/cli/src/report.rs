//! CSV, JSON and SVG output of result tables.

use crate::config::OutputPaths;
use crate::error::{io_err, HarnessError, Result};
use crate::sweep::{ResultRow, ResultTable, COLUMNS};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl ReportFormat {
    fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Svg => "svg",
        }
    }
}

/// Shortest representation that round-trips exactly.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn csv_record(r: &ResultRow) -> [String; 17] {
    [
        num(r.base),
        r.j.to_string(),
        num(r.r_t),
        r.d.to_string(),
        r.replicates.to_string(),
        r.seed.to_string(),
        num(r.dw_empirical),
        num(r.dw_stderr),
        num(r.dw_bound_raw),
        num(r.dw_bound_closed),
        num(r.d2_lower),
        num(r.d2_stderr),
        num(r.d2_bound_fixed),
        num(r.d2_bound_growing),
        num(r.max_offdiag_cov),
        num(r.cov_bound_max),
        num(r.eff_sample_size),
    ]
}

pub fn write_csv<W: Write>(table: &ResultTable, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &table.rows {
        w.write_record(csv_record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(table: &ResultTable) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn read_csv(path: &Path) -> Result<ResultTable> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>().map_err(|e| io_err(path, e))?;
    Ok(ResultTable { rows })
}

const CURVES: [(&str, &str, &str); 4] = [
    ("dw_empirical", "#1f77b4", ""),
    ("dw_bound_raw", "#1f77b4", "6 3"),
    ("d2_lower", "#d62728", ""),
    ("d2_bound_growing", "#d62728", "6 3"),
];

fn curve_value(r: &ResultRow, curve: &str) -> f64 {
    match curve {
        "dw_empirical" => r.dw_empirical,
        "dw_bound_raw" => r.dw_bound_raw,
        "d2_lower" => r.d2_lower,
        _ => r.d2_bound_growing,
    }
}

/// Log-log plot of empirical distances and bounds against `R_t`, one
/// polyline per `(j, curve)`.
pub fn render_svg(table: &ResultTable) -> String {
    let (w, h, margin) = (720.0, 480.0, 60.0);
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .flat_map(|r| CURVES.iter().map(move |c| (r.r_t, curve_value(r, c.0))))
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}"/></g>"#,
        m = margin,
        b = h - margin,
        r = w - margin,
        t = margin
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11" text-anchor="middle">"#);
    for e in (x0 as i64)..=(x1 as i64) {
        let x = sx(e as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{x}" y2="{y2}" stroke="black"/><text x="{x}" y="{ty}">1e{e}</text>"#,
            y = h - margin,
            y2 = h - margin + 5.0,
            ty = h - margin + 18.0
        );
    }
    for e in (y0 as i64)..=(y1 as i64) {
        let y = sy(e as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{x2}" y2="{y}" stroke="black"/><text x="{tx}" y="{ty}">1e{e}</text>"#,
            x = margin - 5.0,
            x2 = margin,
            tx = margin - 24.0,
            ty = y + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">R_t</text></g>"#, w / 2.0, h - 15.0);

    let mut by_j: BTreeMap<usize, Vec<&ResultRow>> = BTreeMap::new();
    for r in &table.rows {
        by_j.entry(r.j).or_default().push(r);
    }
    for (j, mut rows) in by_j {
        rows.sort_by(|a, b| a.r_t.total_cmp(&b.r_t).then(a.d.cmp(&b.d)));
        for (curve, color, dash) in CURVES {
            let coords: Vec<String> = rows
                .iter()
                .map(|r| (r.r_t, curve_value(r, curve)))
                .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
                .map(|(x, y)| format!("{:.2},{:.2}", sx(x.log10()), sy(y.log10())))
                .collect();
            let dash = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
            let _ = writeln!(
                s,
                r#"<polyline data-j="{j}" data-curve="{curve}" points="{}" fill="none" stroke="{color}"{dash}/>"#,
                coords.join(" ")
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<dir>/<stem>.<ext>`; refuses an empty table before touching disk.
pub fn emit_report(table: &ResultTable, format: ReportFormat, paths: &OutputPaths) -> Result<PathBuf> {
    if table.is_empty() {
        return Err(HarnessError::EmptyTable);
    }
    std::fs::create_dir_all(&paths.dir).map_err(|e| io_err(&paths.dir, e))?;
    let path = paths.dir.join(format!("{}.{}", paths.stem, format.extension()));
    let body = match format {
        ReportFormat::Csv => to_csv_string(table),
        ReportFormat::Json => serde_json::to_string_pretty(&table.rows).expect("rows serialize"),
        ReportFormat::Svg => render_svg(table),
    };
    std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Writes any serializable value as pretty JSON.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let body = serde_json::to_string_pretty(value).expect("value serializes");
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}
