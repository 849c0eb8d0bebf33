//! Minimal SVG output: a heatmap and a line plot.

use std::fmt::Write as _;

use ndarray::Array2;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;
const MAX_CELLS: usize = 128;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN / 2.0, HEIGHT - MARGIN, MARGIN / 1.5);
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    let _ = writeln!(out, r#"<text x="{x0}" y="{}" text-anchor="middle">{}</text>"#, y0 + 14.0, label(x.0));
    let _ = writeln!(out, r#"<text x="{x1}" y="{}" text-anchor="middle">{}</text>"#, y0 + 14.0, label(x.1));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 4.0, y0, label(y.0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 4.0, y1 + 8.0, label(y.1));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        format!("{}", (v * 100.0).round() / 100.0)
    } else {
        format!("{v:.1e}")
    }
}

/// White through blue to dark red.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let stops = [(255.0, 255.0, 255.0), (49.0, 130.0, 189.0), (253.0, 174.0, 97.0), (165.0, 0.0, 38.0)];
    let x = t * (stops.len() - 1) as f64;
    let k = (x.floor() as usize).min(stops.len() - 2);
    let f = x - k as f64;
    let mix = |a: f64, b: f64| (a + f * (b - a)).round() as u8;
    let (a, b) = (stops[k], stops[k + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Heatmap of `values[[j, k]]` with rows along x (signal) and columns along
/// y (idler). Large grids are max-pooled down to at most 128 cells per side.
pub fn heatmap(values: &Array2<f64>, x: (f64, f64), y: (f64, f64), title: &str, xlabel: &str, ylabel: &str) -> String {
    let (nx, ny) = values.dim();
    let bx = nx.div_ceil(MAX_CELLS).max(1);
    let by = ny.div_ceil(MAX_CELLS).max(1);
    let (cx, cy) = (nx.div_ceil(bx), ny.div_ceil(by));
    let mut pooled = Array2::<f64>::zeros((cx, cy));
    for ((j, k), &v) in values.indexed_iter() {
        let cell = &mut pooled[[j / bx, k / by]];
        *cell = cell.max(v);
    }
    let vmax = pooled.iter().copied().fold(0.0, f64::max);

    let mut out = String::new();
    header(&mut out, title);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN / 2.0, HEIGHT - MARGIN, MARGIN / 1.5);
    let w = (x1 - x0) / cx as f64;
    let h = (y0 - y1) / cy as f64;
    let _ = writeln!(out, r#"<g shape-rendering="crispEdges">"#);
    for ((j, k), &v) in pooled.indexed_iter() {
        let t = if vmax > 0.0 { v / vmax } else { 0.0 };
        if t < 1e-3 {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x0 + j as f64 * w,
            y0 - (k + 1) as f64 * h,
            w + 0.05,
            h + 0.05,
            color(t)
        );
    }
    let _ = writeln!(out, "</g>");
    axes(&mut out, x, y, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

pub struct Series<'a> {
    pub label: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

/// Line plot; non-finite points break the line.
pub fn line_plot(series: &[Series<'_>], title: &str, xlabel: &str, ylabel: &str) -> String {
    let finite = |s: &Series<'_>| -> Vec<(f64, f64)> {
        s.x.iter().zip(s.y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(&a, &b)| (a, b)).collect()
    };
    let all: Vec<(f64, f64)> = series.iter().flat_map(finite).collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, lo + 0.5),
            _ => (0.0, 1.0),
        }
    };
    let (xr, yr) = (bounds(|p| p.0), bounds(|p| p.1));
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN / 2.0, HEIGHT - MARGIN, MARGIN / 1.5);
    let px = |v: f64| x0 + (v - xr.0) / (xr.1 - xr.0) * (x1 - x0);
    let py = |v: f64| y0 - (v - yr.0) / (yr.1 - yr.0) * (y0 - y1);

    let mut out = String::new();
    header(&mut out, title);
    for (n, s) in series.iter().enumerate() {
        let stroke = PALETTE[n % PALETTE.len()];
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (&a, &b) in s.x.iter().zip(s.y) {
            if a.is_finite() && b.is_finite() {
                runs.last_mut().expect("nonempty").push((px(a), py(b)));
            } else if !runs.last().expect("nonempty").is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let pts: Vec<String> = run.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
        let ly = y1 + 14.0 * (n + 1) as f64;
        let _ = writeln!(out, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{stroke}" stroke-width="2"/>"#, x1 - 110.0, x1 - 90.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x1 - 86.0, ly + 4.0, escape(&s.label));
    }
    axes(&mut out, xr, yr, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}
