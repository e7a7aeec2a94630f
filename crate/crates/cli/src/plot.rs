//! Static SVG renderings of diagrams, curves and cost traces.

use std::fmt::Write as _;

use phkm_core::PersistenceDiagram;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Linear map of data ranges onto the plotting area.
struct Frame {
    x: [f64; 2],
    y: [f64; 2],
}

impl Frame {
    fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        let widen = |r: [f64; 2]| {
            if r[0].is_finite() && r[1].is_finite() && r[1] > r[0] {
                r
            } else if r[0].is_finite() {
                [r[0] - 0.5, r[0] + 0.5]
            } else {
                [0.0, 1.0]
            }
        };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x[0]) / (self.x[1] - self.x[0]) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y[0]) / (self.y[1] - self.y[0]) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(title: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>", WIDTH / 2.0, escape(title));
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(s, "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">");
    let _ = writeln!(s, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\"/>");
    let _ = writeln!(s, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\"/>");
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "<g class=\"ticks\" font-size=\"10\">");
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x[0] + t * (f.x[1] - f.x[0]);
        let yv = f.y[0] + t * (f.y[1] - f.y[0]);
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", f.px(xv), y0 + 14.0, tick(xv));
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>", x0 - 4.0, f.py(yv) + 3.0, tick(yv));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>", WIDTH / 2.0, HEIGHT - 10.0, escape(xlabel));
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 {})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn polyline(s: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str, class: &str) {
    let pts: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y))).collect();
    let _ = writeln!(s, "<polyline class=\"{class}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>", pts.join(" "));
}

/// Birth/death scatter of one or more diagrams over the diagonal. Each
/// distinct point is one marker; multiplicity goes into its tooltip.
pub fn diagram_svg(diagrams: &[PersistenceDiagram], title: &str) -> String {
    let pts = || diagrams.iter().flat_map(|d| d.points());
    let lo = pts().map(|p| p.birth).fold(f64::INFINITY, f64::min).min(0.0);
    let hi = pts().map(|p| p.death).fold(f64::NEG_INFINITY, f64::max);
    let hi = if hi.is_finite() && hi > lo { hi + 0.05 * (hi - lo) } else { lo + 1.0 };
    let f = Frame::new([lo, hi], [lo, hi]);
    let mut s = open(title);
    axes(&mut s, &f, "birth", "death");
    let _ = writeln!(
        s,
        "<line class=\"diagonal\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>",
        f.px(lo),
        f.py(lo),
        f.px(hi),
        f.py(hi)
    );
    for (i, d) in diagrams.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for p in d.points() {
            let _ = writeln!(
                s,
                "<circle class=\"point\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"><title>H{} ({}, {}) x{}</title></circle>",
                f.px(p.birth),
                f.py(p.death),
                d.dimension(),
                p.birth,
                p.death,
                p.multiplicity
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Curves sampled on a shared grid, one polyline each.
pub fn curves_svg(grid: &[f64], curves: &[Vec<f64>], title: &str) -> String {
    let lo = curves.iter().flatten().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = curves.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let x = [grid.first().copied().unwrap_or(0.0), grid.last().copied().unwrap_or(1.0)];
    let f = Frame::new(x, [lo, if hi > lo { hi * 1.05 } else { lo + 1.0 }]);
    let mut s = open(title);
    axes(&mut s, &f, "t", "value");
    for (i, c) in curves.iter().enumerate() {
        polyline(&mut s, &f, grid, c, COLORS[i % COLORS.len()], "curve");
    }
    s.push_str("</svg>\n");
    s
}

/// Clustering cost against iteration.
pub fn trace_svg(trace: &[f64], title: &str) -> String {
    let xs: Vec<f64> = (0..trace.len()).map(|i| i as f64).collect();
    let lo = trace.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = trace.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f = Frame::new([0.0, (trace.len().max(2) - 1) as f64], [lo, if hi > lo { hi * 1.05 } else { lo + 1.0 }]);
    let mut s = open(title);
    axes(&mut s, &f, "iteration", "cost");
    polyline(&mut s, &f, &xs, trace, COLORS[0], "trace");
    s.push_str("</svg>\n");
    s
}
