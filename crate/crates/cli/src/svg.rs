//! Minimal standalone SVG: scatter plots in the complex plane and heatmaps.
//!
//! Colors run through a fixed five-stop ramp (dark blue to yellow) over
//! [0, 1]; the ramp is a display convention only.

use std::fmt::Write;

const STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

pub fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let k = STOPS.iter().position(|s| s.0 >= t).unwrap_or(STOPS.len() - 1).max(1);
    let (a, b) = (STOPS[k - 1], STOPS[k]);
    let f = (t - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] as f64 + f * (b.1[i] as f64 - a.1[i] as f64)).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

/// Points (re, im, value in [0, 1]) with the unit circle and both axes.
pub fn complex_scatter(points: &[(f64, f64, f64)], title: &str) -> String {
    let size = 600.0;
    let extent = points
        .iter()
        .map(|p| p.0.abs().max(p.1.abs()))
        .fold(1.2f64, f64::max)
        .min(1e3);
    let scale = 0.45 * size / extent;
    let c = size / 2.0;
    let mut s = header(size, size);
    let _ = writeln!(s, "<line x1=\"0\" y1=\"{c}\" x2=\"{size}\" y2=\"{c}\" stroke=\"#999\" stroke-width=\"1\"/>");
    let _ = writeln!(s, "<line x1=\"{c}\" y1=\"0\" x2=\"{c}\" y2=\"{size}\" stroke=\"#999\" stroke-width=\"1\"/>");
    let _ = writeln!(
        s,
        "<circle cx=\"{c}\" cy=\"{c}\" r=\"{:.3}\" fill=\"none\" stroke=\"#555\" stroke-width=\"1\"/>",
        scale
    );
    for &(re, im, v) in points {
        let (x, y) = (c + re * scale, c - im * scale);
        if x.is_finite() && y.is_finite() {
            let _ = writeln!(s, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2.5\" fill=\"{}\"/>", color(v));
        }
    }
    let _ = writeln!(s, "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>", escape(title));
    s.push_str("</svg>\n");
    s
}

/// Heatmap of `values[i][j]` (row i along y, column j along x, both
/// ascending) over the box [x0, x1] × [y0, y1], with optional polylines in
/// data coordinates drawn on top.
pub struct Heatmap<'a> {
    pub values: &'a [Vec<f64>],
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub title: &'a str,
    pub overlays: Vec<Vec<(f64, f64)>>,
}

impl Heatmap<'_> {
    pub fn render(&self) -> String {
        let (w, h, margin) = (640.0, 640.0, 60.0);
        let rows = self.values.len().max(1);
        let cols = self.values.first().map_or(1, |r| r.len().max(1));
        let (pw, ph) = (w - 2.0 * margin, h - 2.0 * margin);
        let (cw, ch) = (pw / cols as f64, ph / rows as f64);
        let mut s = header(w, h);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let x = margin + j as f64 * cw;
                let y = margin + ph - (i + 1) as f64 * ch;
                let _ = writeln!(
                    s,
                    "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\"/>",
                    cw + 0.01,
                    ch + 0.01,
                    color(v)
                );
            }
        }
        // cell centres sit at the axis values
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let sx = |x: f64| {
            if cols > 1 && x1 > x0 {
                margin + cw / 2.0 + (x - x0) / (x1 - x0) * (pw - cw)
            } else {
                margin + pw / 2.0
            }
        };
        let sy = |y: f64| {
            if rows > 1 && y1 > y0 {
                margin + ph - ch / 2.0 - (y - y0) / (y1 - y0) * (ph - ch)
            } else {
                margin + ph / 2.0
            }
        };
        for line in &self.overlays {
            let pts: Vec<String> = line
                .iter()
                .filter(|(x, y)| *x >= x0 && *x <= x1 && *y >= y0 && *y <= y1)
                .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
                .collect();
            if pts.len() > 1 {
                let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>", pts.join(" "));
            }
        }
        let _ = writeln!(
            s,
            "<rect x=\"{margin}\" y=\"{margin}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>"
        );
        let text = |s: &mut String, x: f64, y: f64, t: &str| {
            let _ = writeln!(s, "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>", escape(t));
        };
        text(&mut s, w / 2.0 - 20.0, h - 15.0, self.x_label);
        text(&mut s, 10.0, h / 2.0, self.y_label);
        text(&mut s, margin, margin - 25.0, self.title);
        text(&mut s, margin, h - margin + 18.0, &format!("{x0}"));
        text(&mut s, w - margin - 30.0, h - margin + 18.0, &format!("{x1}"));
        text(&mut s, 10.0, h - margin, &format!("{y0}"));
        text(&mut s, 10.0, margin + 10.0, &format!("{y1}"));
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
