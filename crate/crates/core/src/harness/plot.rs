//! Deterministic SVG line plots of `results.csv`.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};

use super::{read_csv, ResultRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Roc,
    Accuracy,
    Sinr,
}

impl FromStr for PlotKind {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roc" => Ok(PlotKind::Roc),
            "accuracy" => Ok(PlotKind::Accuracy),
            "sinr" => Ok(PlotKind::Sinr),
            other => Err(IsacError::InvalidConfig(format!("unknown plot kind {other:?}; valid: roc, accuracy, sinr"))),
        }
    }
}

/// A polyline; `None` marks a gap (no successful draw at that x).
struct Series {
    label: String,
    points: Vec<(f64, Option<f64>)>,
}

/// Key that orders floats exactly and compares equal only for identical bits.
fn key(x: f64) -> (i64, u64) {
    (x.total_cmp(&0.0) as i64, x.to_bits())
}

fn mean_curve<'a>(rows: impl Iterator<Item = &'a ResultRow>, x_of: impl Fn(&ResultRow) -> f64) -> Vec<(f64, Option<f64>)> {
    let mut acc: BTreeMap<(i64, u64), (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let x = x_of(r);
        let entry = acc.entry(key(x)).or_insert((x, 0.0, 0));
        if let (true, Some(y)) = (r.is_ok(), r.metric_y) {
            entry.1 += y;
            entry.2 += 1;
        }
    }
    let mut points: Vec<(f64, Option<f64>)> =
        acc.into_values().map(|(x, sum, n)| (x, (n > 0).then(|| sum / n as f64))).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points
}

fn build_series(rows: &[ResultRow], kind: PlotKind) -> Vec<Series> {
    let mut out = Vec::new();
    match kind {
        PlotKind::Roc => {
            let mut values: Vec<f64> =
                rows.iter().filter(|r| r.metric_name.starts_with("roc")).map(|r| r.sweep_value).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for v in values {
                let name = rows.iter().find(|r| r.sweep_value == v).map(|r| r.sweep_name.clone()).unwrap_or_default();
                let selected = rows.iter().filter(|r| r.metric_name.starts_with("roc") && r.sweep_value == v);
                out.push(Series { label: format!("{name} = {v}"), points: mean_curve(selected, |r| r.metric_x) });
            }
        }
        PlotKind::Accuracy | PlotKind::Sinr => {
            let mut names: Vec<&str> = rows.iter().map(|r| r.metric_name.as_str()).collect();
            names.sort();
            names.dedup();
            for name in names {
                let selected = rows.iter().filter(|r| r.metric_name == name);
                let mut points = if kind == PlotKind::Accuracy {
                    mean_curve(selected, |r| r.sweep_value)
                } else {
                    mean_curve(selected, |r| r.metric_x)
                };
                if kind == PlotKind::Sinr {
                    for p in points.iter_mut() {
                        p.1 = p.1.filter(|y| *y > 0.0).map(|y| 10.0 * y.log10());
                    }
                }
                out.push(Series { label: name.to_string(), points });
            }
        }
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return None;
    }
    Some(if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) })
}

/// SVG text for `rows`; errors if no row carries a value.
pub fn render_plot(rows: &[ResultRow], kind: PlotKind) -> Result<String> {
    let series = build_series(rows, kind);
    let ys = series.iter().flat_map(|s| s.points.iter().filter_map(|p| p.1));
    let Some(y_data) = range(ys) else {
        return Err(IsacError::Experiment("no successful rows to plot".into()));
    };
    let x_data = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))).unwrap_or((0.0, 1.0));
    let (x_label, y_label, (x0, x1), (y0, y1)) = match kind {
        PlotKind::Roc => ("false-alarm probability P_fa", "detection probability P_de", (0.0, 1.0), (0.0, 1.0)),
        PlotKind::Accuracy => ("Rx fronthaul capacity C_RX (bits/symbol)", "sensing accuracy P_sa", x_data, y_data),
        PlotKind::Sinr => ("user angle (degrees)", "sensing SINR (dB)", x_data, y_data),
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{y_label}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (idx, s) in series.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, svg: &mut String| {
            if !segment.is_empty() {
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    segment.join(" ")
                );
                segment.clear();
            }
        };
        for &(x, y) in &s.points {
            match y {
                Some(y) => {
                    segment.push(format!("{:.2},{:.2}", sx(x), sy(y)));
                    let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#, sx(x), sy(y));
                }
                None => flush(&mut segment, &mut svg),
            }
        }
        flush(&mut segment, &mut svg);
        let ly = TOP + 10.0 + 18.0 * idx as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads `csv` and writes the plot of `kind` to `out`.
pub fn emit_plot(csv: &Path, kind: PlotKind, out: &Path) -> Result<()> {
    let rows = read_csv(csv)?;
    std::fs::write(out, render_plot(&rows, kind)?)?;
    Ok(())
}
