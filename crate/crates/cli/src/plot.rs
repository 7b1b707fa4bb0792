//! Minimal deterministic SVG charts for the CSV outputs.

use std::fmt::{self, Write as _};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom

#[derive(Debug, PartialEq)]
pub enum PlotError {
    EmptyInput,
    Malformed(String),
}

impl fmt::Display for PlotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlotError::EmptyInput => f.write_str("input contains no data rows"),
            PlotError::Malformed(m) => write!(f, "malformed CSV: {m}"),
        }
    }
}

impl std::error::Error for PlotError {}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse(text: &str) -> Result<Table, PlotError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or(PlotError::EmptyInput)?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| PlotError::Malformed(format!("row {}: {e}", k + 1)))?;
        if row.len() != header.len() {
            return Err(PlotError::Malformed(format!(
                "row {} has {} fields, header has {}",
                k + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(PlotError::EmptyInput);
    }
    Ok(Table { header, rows })
}

/// Chart for either an entropy series or a section.
pub fn render(text: &str) -> Result<String, PlotError> {
    let table = parse(text)?;
    match table.header.first().map(String::as_str) {
        Some("t") => Ok(series_chart(&table)),
        Some("q2") if table.header.len() == 4 => Ok(section_chart(&table)),
        _ => Err(PlotError::Malformed(format!(
            "unrecognised header {:?}",
            table.header.join(",")
        ))),
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN.0 + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN.0 - MARGIN.1)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN.3 - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN.2 - MARGIN.3)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn open(svg: &mut String, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN.0, WIDTH - MARGIN.1, MARGIN.2, HEIGHT - MARGIN.3);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y0}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for t in ticks(frame.x.0, frame.x.1) {
        let x = frame.px(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            y1 + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y1 + 18.0,
            fmt_tick(t)
        );
    }
    for t in ticks(frame.y.0, frame.y.1) {
        let y = frame.py(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#,
        0.5 * (x0 + x1),
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Style {
    column: &'static str,
    color: &'static str,
    dash: Option<&'static str>,
    width: f64,
}

const SERIES_STYLES: [Style; 5] = [
    Style {
        column: "I_ref",
        color: "#9bbbe0",
        dash: None,
        width: 4.0,
    },
    Style {
        column: "Icl_ref",
        color: "#e8a9a9",
        dash: Some("10 5"),
        width: 4.0,
    },
    Style {
        column: "I_q",
        color: "#1f4e9c",
        dash: None,
        width: 1.8,
    },
    Style {
        column: "I_cl",
        color: "#b22222",
        dash: Some("7 4"),
        width: 1.8,
    },
    Style {
        column: "I_cl_mc",
        color: "#2e8b57",
        dash: Some("2 3"),
        width: 1.4,
    },
];

fn series_chart(table: &Table) -> String {
    let present: Vec<(&Style, usize)> = SERIES_STYLES
        .iter()
        .filter_map(|s| {
            table
                .header
                .iter()
                .position(|h| h == s.column)
                .map(|i| (s, i))
        })
        .filter(|(_, i)| table.rows.iter().any(|r| r[*i].is_finite()))
        .collect();
    let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for (_, i) in &present {
        for r in &table.rows {
            if r[*i].is_finite() {
                lo = lo.min(r[*i]);
                hi = hi.max(r[*i]);
            }
        }
    }
    let frame = Frame {
        x: padded(
            xs.iter().copied().fold(f64::INFINITY, f64::min),
            xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ),
        y: padded(lo, hi),
    };
    let mut svg = String::new();
    open(&mut svg, &frame, "t", "mutual information");
    for (k, (style, i)) in present.iter().enumerate() {
        // NaN entries split the curve
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for r in &table.rows {
            if r[*i].is_finite() {
                segments
                    .last_mut()
                    .expect("non-empty")
                    .push((frame.px(r[0]), frame.py(r[*i])));
            } else if !segments.last().expect("non-empty").is_empty() {
                segments.push(Vec::new());
            }
        }
        let dash = style
            .dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        for seg in segments.iter().filter(|s| s.len() > 1) {
            let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="{}"{dash} points="{}"/>"#,
                style.color,
                style.width,
                pts.join(" ")
            );
        }
        let ly = MARGIN.2 + 18.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN.1 - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="{}"{dash}/>"#,
            lx + 36.0,
            style.color,
            style.width
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 44.0,
            ly + 4.0,
            style.column
        );
    }
    svg.push_str("</svg>\n");
    svg
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn section_chart(table: &Table) -> String {
    let fold =
        |i: usize, f: fn(f64, f64) -> f64, init: f64| table.rows.iter().map(|r| r[i]).fold(init, f);
    let frame = Frame {
        x: padded(
            fold(0, f64::min, f64::INFINITY),
            fold(0, f64::max, f64::NEG_INFINITY),
        ),
        y: padded(
            fold(1, f64::min, f64::INFINITY),
            fold(1, f64::max, f64::NEG_INFINITY),
        ),
    };
    let mut svg = String::new();
    open(&mut svg, &frame, "q2", "p2");
    for r in &table.rows {
        let color = PALETTE[(r[2].max(0.0) as usize) % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.2" fill="{color}"/>"#,
            frame.px(r[0]),
            frame.py(r[1])
        );
    }
    svg.push_str("</svg>\n");
    svg
}
