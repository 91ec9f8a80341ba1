//! Minimal deterministic SVG line plots and heatmaps.

use std::fmt::Write as _;

use phc_core::cqed::SweepResult;

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub type Series<'a> = (&'a str, &'a [f64], &'a [f64]);

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if !(lo.is_finite() && hi.is_finite()) {
                (0.0, 1.0)
            } else if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        Frame { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn extent<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 18.0, tick(xv));
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let x = extent(series.iter().flat_map(|s| s.1.iter()));
    let y = extent(series.iter().flat_map(|s| s.2.iter()));
    let f = Frame::new(x, y);
    let mut s = String::new();
    header(&mut s, title);
    axes(&mut s, &f, x_label, y_label);
    for (k, (name, xs, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (&xv, &yv) in xs.iter().zip(ys.iter()) {
            if !(xv.is_finite() && yv.is_finite()) {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, f.px(xv), f.py(yv));
            pen_down = true;
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, W - RIGHT - 110.0, W - RIGHT - 90.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, W - RIGHT - 85.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

/// `z[i][j]` is the value at `(xs[i], ys[j])`.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64], z: &[Vec<f64>]) -> String {
    let f = Frame::new(extent(xs.iter()), extent(ys.iter()));
    let (zlo, zhi) = extent(z.iter().flatten());
    let span = if zhi > zlo { zhi - zlo } else { 1.0 };
    let cell = |v: &[f64], i: usize| {
        let lo = if i == 0 { v[0] } else { 0.5 * (v[i - 1] + v[i]) };
        let hi = if i + 1 == v.len() { v[i] } else { 0.5 * (v[i] + v[i + 1]) };
        (lo, hi)
    };
    let mut s = String::new();
    header(&mut s, title);
    for (i, row) in z.iter().enumerate().take(xs.len()) {
        let (xa, xb) = cell(xs, i);
        for (j, &v) in row.iter().enumerate().take(ys.len()) {
            let (ya, yb) = cell(ys, j);
            let t = if v.is_finite() { ((v - zlo) / span).clamp(0.0, 1.0) } else { 0.0 };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                f.px(xa),
                f.py(yb),
                (f.px(xb) - f.px(xa)).max(0.5),
                (f.py(ya) - f.py(yb)).max(0.5),
                colormap(t)
            );
        }
    }
    axes(&mut s, &f, x_label, y_label);
    s.push_str("</svg>\n");
    s
}

/// Dark blue through yellow.
fn colormap(t: f64) -> String {
    let stops = [(0.0, [20.0, 20.0, 90.0]), (0.5, [200.0, 40.0, 90.0]), (1.0, [250.0, 230.0, 60.0])];
    let k = if t < 0.5 { 0 } else { 1 };
    let (t0, c0) = stops[k];
    let (t1, c1) = stops[k + 1];
    let u = (t - t0) / (t1 - t0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + u * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

pub fn sweep_plot(r: &SweepResult) -> String {
    let d: Vec<f64> = r.points.iter().map(|p| p.detuning).collect();
    let lo: Vec<f64> = r.points.iter().map(|p| p.lower.re).collect();
    let up: Vec<f64> = r.points.iter().map(|p| p.upper.re).collect();
    let qd: Vec<f64> = r.points.iter().map(|p| p.detuning).collect();
    let cav = vec![0.0; d.len()];
    line_plot(
        "Polariton branches",
        "detuning (ueV)",
        "energy (ueV)",
        &[("lower", &d, &lo), ("upper", &d, &up), ("emitter", &d, &qd), ("cavity", &d, &cav)],
    )
}
