//! Static SVG line plots.

use std::fmt::Write;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
    ticks: Vec<(f64, String)>,
}

impl Axis {
    fn new(values: &[f64], log: bool, name: &str) -> CliResult<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || (log && **v <= 0.0)) {
            return Err(CliError::Validation(format!("{name} value {v} cannot be plotted")));
        }
        let t: Vec<f64> = values.iter().map(|&v| if log { v.log10() } else { v }).collect();
        let (mut lo, mut hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if log {
            lo = lo.floor();
            hi = hi.ceil();
            if hi == lo {
                hi += 1.0;
            }
            let step = ((hi - lo) / 8.0).ceil().max(1.0);
            let mut ticks = Vec::new();
            let mut e = lo;
            while e <= hi + 1e-9 {
                ticks.push((e, format!("1e{e}")));
                e += step;
            }
            return Ok(Self { log, lo, hi, ticks });
        }
        if hi == lo {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
            lo -= pad;
            hi += pad;
        }
        let ticks = (0..5)
            .map(|k| {
                let v = lo + (hi - lo) * k as f64 / 4.0;
                (v, tick_label(v))
            })
            .collect();
        Ok(Self { log, lo, hi, ticks })
    }

    fn fraction(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn tick_fraction(&self, t: f64) -> f64 {
        (t - self.lo) / (self.hi - self.lo)
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the series as one SVG document. Output depends only on the
/// arguments; an empty series list or one without points is rejected.
pub fn emit_plot(series: &[Series], opts: &PlotOptions) -> CliResult<String> {
    let points: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if points.is_empty() {
        return Err(CliError::Validation("plot needs at least one point".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let xa = Axis::new(&xs, opts.log_x, "x")?;
    let ya = Axis::new(&ys, opts.log_y, "y")?;
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |f: f64| LEFT + f * pw;
    let py = |f: f64| TOP + (1.0 - f) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&opts.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for (t, label) in &xa.ticks {
        let x = px(xa.tick_fraction(*t));
        let _ =
            writeln!(out, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ccc"/>"##, TOP, TOP + ph);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            escape(label)
        );
    }
    for (t, label) in &ya.ticks {
        let y = py(ya.tick_fraction(*t));
        let _ =
            writeln!(out, r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ccc"/>"##, LEFT + pw);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&opts.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&opts.y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> =
            s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(xa.fraction(x)), py(ya.fraction(y)))).collect();
        if coords.len() > 1 {
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        for c in &coords {
            let (x, y) = c.split_once(',').expect("formatted pair");
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#);
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + pw - 120.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 24.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
