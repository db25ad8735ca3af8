//! A minimal SVG writer for root scatter plots and time-response line plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// One named line series.
pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

/// One named group of scatter points; `size` scales the marker radius.
pub struct PointSet<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64, usize)],
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit<'a>(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Self {
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in xs.filter(|v| v.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for y in ys.filter(|v| v.is_finite()) {
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !(x0 < x1) {
            x0 = if x0.is_finite() { x0 - 1.0 } else { -1.0 };
            x1 = x0 + 2.0;
        }
        if !(y0 < y1) {
            y0 = if y0.is_finite() { y0 - 1.0 } else { -1.0 };
            y1 = y0 + 2.0;
        }
        let pad_x = 0.05 * (x1 - x0);
        let pad_y = 0.05 * (y1 - y0);
        Self {
            x0: x0 - pad_x,
            x1: x1 + pad_x,
            y0: y0 - pad_y,
            y1: y1 + pad_y,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(out: &mut String, title: &str, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = write!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = write!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = write!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for (v, anchor_x) in [(frame.x0, l), (frame.x1, r)] {
        let _ = write!(
            out,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{:.3}</text>"#,
            b + 14.0,
            v
        );
    }
    for (v, anchor_y) in [(frame.y0, b), (frame.y1, t)] {
        let _ = write!(
            out,
            r#"<text x="{}" y="{anchor_y}" text-anchor="end" font-family="sans-serif" font-size="10">{:.3}</text>"#,
            l - 4.0,
            v
        );
    }
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = write!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    if frame.x0 < 0.0 && frame.x1 > 0.0 {
        let x = frame.px(0.0);
        let _ = write!(out, r##"<line x1="{x}" y1="{t}" x2="{x}" y2="{b}" stroke="#bbbbbb"/>"##);
    }
    if frame.y0 < 0.0 && frame.y1 > 0.0 {
        let y = frame.py(0.0);
        let _ = write!(out, r##"<line x1="{l}" y1="{y}" x2="{r}" y2="{y}" stroke="#bbbbbb"/>"##);
    }
}

fn legend(out: &mut String, labels: &[&str]) {
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN - 130.0;
        let _ = write!(
            out,
            r#"<rect x="{x}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            y - 9.0,
            COLORS[i % COLORS.len()],
            x + 14.0,
            y,
            escape(label)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot of root locations in the complex plane.
pub fn scatter_plot(title: &str, sets: &[PointSet<'_>]) -> String {
    let frame = Frame::fit(
        sets.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
        sets.iter().flat_map(|s| s.points.iter().map(|p| p.1)),
    );
    let mut out = String::new();
    open(&mut out, title, &frame, "Re s", "Im s");
    for (i, set) in sets.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for &(x, y, m) in set.points {
            let r = 3.0 + 1.5 * (m.max(1) as f64 - 1.0);
            let _ = write!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="none" stroke="{color}"/>"#,
                frame.px(x),
                frame.py(y)
            );
        }
    }
    legend(&mut out, &sets.iter().map(|s| s.label).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Line plot of one or more time series.
pub fn line_plot(title: &str, series: &[Series<'_>]) -> String {
    let frame = Frame::fit(
        series.iter().flat_map(|s| s.x.iter().copied()),
        series.iter().flat_map(|s| s.y.iter().copied()),
    );
    let mut out = String::new();
    open(&mut out, title, &frame, "t", "y");
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (k, (x, y)) in s.x.iter().zip(s.y).enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2} {:.2} ", frame.px(*x), frame.py(*y));
        }
        let _ = write!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
    }
    legend(&mut out, &series.iter().map(|s| s.label).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}
