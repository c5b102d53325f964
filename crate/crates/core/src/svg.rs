//! Static SVG 1.1 figures rendered directly from traces.
//!
//! Three figure kinds: a top-down trajectory plot (polygon, robot paths,
//! target path, trigger marks), a time-series line chart, and a bar chart
//! with standard-deviation whiskers for batch comparisons. Everything is
//! plain string assembly — plots are derived from already-computed data and
//! never feed back into the simulation.

use crate::engine::SimTrace;
use crate::geometry::ConvexPolygon;
use std::fmt::Write;

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else {
        "0".to_owned()
    }
}

struct Canvas {
    width: f64,
    height: f64,
    body: String,
}

impl Canvas {
    fn new(width: f64, height: f64) -> Self {
        Self { width, height, body: String::new() }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{width}"/>"#,
            fmt(x1),
            fmt(y1),
            fmt(x2),
            fmt(y2)
        )
        .unwrap();
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut s = String::new();
        for (x, y) in pts {
            write!(s, "{},{} ", fmt(*x), fmt(*y)).unwrap();
        }
        writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            s.trim_end()
        )
        .unwrap();
    }

    fn polygon(&mut self, pts: &[(f64, f64)], stroke: &str, fill: &str) {
        let mut s = String::new();
        for (x, y) in pts {
            write!(s, "{},{} ", fmt(*x), fmt(*y)).unwrap();
        }
        writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#,
            s.trim_end()
        )
        .unwrap();
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            fmt(x),
            fmt(y),
            fmt(r)
        )
        .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(h)
        )
        .unwrap();
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        let escaped = content
            .replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;");
        writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif" text-anchor="{anchor}">{escaped}</text>"#,
            fmt(x),
            fmt(y),
            fmt(size)
        )
        .unwrap();
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{body}</svg>\n",
            w = fmt(self.width),
            h = fmt(self.height),
            body = self.body
        )
    }
}

/// Nice round step for roughly `count` axis ticks across `span`.
fn tick_step(span: f64, count: usize) -> f64 {
    if span <= 0.0 || !span.is_finite() {
        return 1.0;
    }
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Top-down view: polygon boundary, per-robot trajectories, the target
/// path, and marks where triggers fired (subsampled on long traces).
pub fn trajectories(trace: &SimTrace, poly: &ConvexPolygon) -> String {
    let (w, h) = (640.0, 640.0);
    let mut canvas = Canvas::new(w, h);
    // world-to-screen transform from the polygon bounding box
    let xs: Vec<f64> = poly.vertices().iter().map(|v| v.x).collect();
    let ys: Vec<f64> = poly.vertices().iter().map(|v| v.y).collect();
    let (min_x, max_x) = (xs.iter().cloned().fold(f64::MAX, f64::min), xs.iter().cloned().fold(f64::MIN, f64::max));
    let (min_y, max_y) = (ys.iter().cloned().fold(f64::MAX, f64::min), ys.iter().cloned().fold(f64::MIN, f64::max));
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let margin = 40.0;
    let scale = (w - 2.0 * margin) / (span * 1.05);
    let cx = 0.5 * (min_x + max_x);
    let cy = 0.5 * (min_y + max_y);
    let map = |p: &nalgebra::Point2<f64>| -> (f64, f64) {
        (w / 2.0 + (p.x - cx) * scale, h / 2.0 - (p.y - cy) * scale)
    };

    let ring: Vec<(f64, f64)> = poly.vertices().iter().map(&map).collect();
    canvas.polygon(&ring, "#333333", "#f7f7f7");

    let n = trace.records.first().map(|r| r.positions.len()).unwrap_or(0);
    for i in 0..n {
        let pts: Vec<(f64, f64)> =
            trace.records.iter().map(|r| map(&r.positions[i])).collect();
        let color = PALETTE[i % PALETTE.len()];
        canvas.polyline(&pts, color, 1.2);
        if let (Some(first), Some(last)) = (pts.first(), pts.last()) {
            canvas.circle(first.0, first.1, 3.0, "#ffffff");
            canvas.circle(first.0, first.1, 2.0, color);
            canvas.circle(last.0, last.1, 4.0, color);
        }
    }
    // target path on top, dashed-looking via short segments is overkill;
    // a thin black line reads fine
    let target_pts: Vec<(f64, f64)> = trace.records.iter().map(|r| map(&r.target)).collect();
    canvas.polyline(&target_pts, "#000000", 1.0);
    if let Some(last) = target_pts.last() {
        canvas.circle(last.0, last.1, 5.0, "#000000");
    }
    // trigger marks, at most ~800 across the trace
    let total_marks: usize =
        trace.records.iter().map(|r| r.triggered.iter().filter(|&&t| t).count()).sum();
    let stride = (total_marks / 800).max(1);
    let mut seen = 0usize;
    for rec in &trace.records {
        for i in 0..n {
            if rec.triggered[i] {
                if seen.is_multiple_of(stride) {
                    let (x, y) = map(&rec.positions[i]);
                    canvas.circle(x, y, 1.6, "#00000055");
                }
                seen += 1;
            }
        }
    }
    canvas.text(w / 2.0, 24.0, 16.0, "middle", "robot trajectories");
    canvas.finish()
}

/// Step-indexed line chart, one polyline per named series, with axes,
/// ticks, and a legend.
pub fn series_chart(title: &str, y_label: &str, series: &[(String, Vec<f64>)]) -> String {
    let (w, h) = (720.0, 420.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 44.0, 50.0);
    let mut canvas = Canvas::new(w, h);
    let max_len = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0).max(2);
    let mut y_min = f64::MAX;
    let mut y_max = f64::MIN;
    for (_, v) in series {
        for &y in v {
            if y.is_finite() {
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
    }
    if y_min > y_max {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min).abs() < 1e-12 {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let (y_lo, y_hi) = ((y_min - pad).min(0.0).max(y_min - pad), y_max + pad);
    let px = |k: f64| ml + k / (max_len - 1) as f64 * (w - ml - mr);
    let py = |v: f64| h - mb - (v - y_lo) / (y_hi - y_lo) * (h - mt - mb);

    // axes
    canvas.line(ml, h - mb, w - mr, h - mb, "#000000", 1.0);
    canvas.line(ml, mt, ml, h - mb, "#000000", 1.0);
    let xstep = tick_step((max_len - 1) as f64, 6);
    let mut x = 0.0;
    while x <= (max_len - 1) as f64 + 1e-9 {
        canvas.line(px(x), h - mb, px(x), h - mb + 5.0, "#000000", 1.0);
        canvas.text(px(x), h - mb + 18.0, 11.0, "middle", &format!("{}", x as u64));
        x += xstep;
    }
    let ystep = tick_step(y_hi - y_lo, 5);
    let mut y = (y_lo / ystep).ceil() * ystep;
    while y <= y_hi + 1e-12 {
        canvas.line(ml - 5.0, py(y), ml, py(y), "#000000", 1.0);
        canvas.line(ml, py(y), w - mr, py(y), "#e0e0e0", 0.5);
        canvas.text(ml - 9.0, py(y) + 4.0, 11.0, "end", &format!("{y:.3}"));
        y += ystep;
    }
    canvas.text(w / 2.0, h - 12.0, 13.0, "middle", "step");
    canvas.text(16.0, mt - 14.0, 13.0, "start", y_label);
    canvas.text(w / 2.0, 22.0, 15.0, "middle", title);

    for (idx, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(k, &v)| (px(k as f64), py(v)))
            .collect();
        canvas.polyline(&pts, color, 1.4);
        let ly = mt + 16.0 * idx as f64;
        canvas.rect(w - mr - 150.0, ly - 8.0, 12.0, 3.0, color);
        canvas.text(w - mr - 132.0, ly - 3.0, 11.0, "start", name);
    }
    canvas.finish()
}

/// Bar chart with standard-deviation whiskers: one `(label, mean, std)`
/// triple per bar.
pub fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64, f64)]) -> String {
    let (w, h) = (480.0, 360.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 44.0, 60.0);
    let mut canvas = Canvas::new(w, h);
    let y_max = bars
        .iter()
        .map(|(_, m, s)| m + s)
        .fold(0.0f64, f64::max)
        .max(1e-9)
        * 1.1;
    let py = |v: f64| h - mb - v / y_max * (h - mt - mb);
    canvas.line(ml, h - mb, w - mr, h - mb, "#000000", 1.0);
    canvas.line(ml, mt, ml, h - mb, "#000000", 1.0);
    let ystep = tick_step(y_max, 5);
    let mut y = 0.0;
    while y <= y_max + 1e-12 {
        canvas.line(ml - 5.0, py(y), ml, py(y), "#000000", 1.0);
        canvas.line(ml, py(y), w - mr, py(y), "#e0e0e0", 0.5);
        canvas.text(ml - 9.0, py(y) + 4.0, 11.0, "end", &format!("{y:.3}"));
        y += ystep;
    }
    let slot = (w - ml - mr) / bars.len().max(1) as f64;
    for (idx, (label, mean, std)) in bars.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let x0 = ml + idx as f64 * slot + 0.2 * slot;
        let bw = 0.6 * slot;
        canvas.rect(x0, py(*mean), bw, (h - mb) - py(*mean), color);
        // standard-deviation whisker
        let xc = x0 + bw / 2.0;
        canvas.line(xc, py(mean + std), xc, py((mean - std).max(0.0)), "#000000", 1.2);
        canvas.line(xc - 6.0, py(mean + std), xc + 6.0, py(mean + std), "#000000", 1.2);
        canvas.line(
            xc - 6.0,
            py((mean - std).max(0.0)),
            xc + 6.0,
            py((mean - std).max(0.0)),
            "#000000",
            1.2,
        );
        canvas.text(xc, py(mean + std) - 6.0, 11.0, "middle", &format!("{mean:.3}"));
        canvas.text(xc, h - mb + 18.0, 12.0, "middle", label);
    }
    canvas.text(16.0, mt - 14.0, 13.0, "start", y_label);
    canvas.text(w / 2.0, 22.0, 15.0, "middle", title);
    canvas.finish()
}
