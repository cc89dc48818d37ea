//! Minimal SVG emitters: persistence diagrams and 2-D decision regions.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use vistopo_core::persistence::PersistenceDiagram;

const SIZE: f64 = 400.0;
const PAD: f64 = 40.0;

fn header(out: &mut String, reproducible: bool) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        SIZE + 2.0 * PAD
    ));
    if !reproducible {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(out, "<!-- generated at unix time {secs} -->");
    }
}

struct Axes {
    lo: f64,
    hi: f64,
}

impl Axes {
    fn new(lo: f64, hi: f64) -> Self {
        if hi > lo {
            Self { lo, hi }
        } else {
            Self { lo: lo - 0.5, hi: lo + 0.5 }
        }
    }

    fn x(&self, v: f64) -> f64 {
        PAD + (v - self.lo) / (self.hi - self.lo) * SIZE
    }

    fn y(&self, v: f64) -> f64 {
        PAD + SIZE - (v - self.lo) / (self.hi - self.lo) * SIZE
    }
}

/// Birth on x, death on y. `Dg0` points are circles above the diagonal,
/// `ExDg1` points squares below it; essential points sit on a dashed line
/// at the top of the plot.
pub fn diagram_svg(d: &PersistenceDiagram, title: &str, reproducible: bool) -> String {
    let finite: Vec<f64> = d
        .dim0
        .iter()
        .chain(&d.dim1)
        .flat_map(|p| [p.birth, p.death])
        .filter(|v| v.is_finite())
        .collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let top = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(lo);
    let inf_line = top + 0.1 * (top - lo).max(1.0);
    let ax = Axes::new(lo, inf_line);

    let mut s = String::new();
    header(&mut s, reproducible);
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(
        s,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"#888\"/>",
        ax.x(ax.lo),
        ax.y(ax.lo),
        ax.x(ax.hi),
        ax.y(ax.hi)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>",
        ax.x(ax.lo),
        ax.y(inf_line),
        ax.x(ax.hi),
        ax.y(inf_line)
    );
    for p in &d.dim0 {
        let death = if p.essential { inf_line } else { p.death };
        let _ = writeln!(
            s,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"#1f77b4\"/>",
            ax.x(p.birth),
            ax.y(death)
        );
    }
    for p in &d.dim1 {
        let _ = writeln!(
            s,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"8\" height=\"8\" fill=\"#d62728\"/>",
            ax.x(p.birth) - 4.0,
            ax.y(p.death) - 4.0
        );
    }
    axis_labels(&mut s, "birth", "death");
    s.push_str("</svg>\n");
    s
}

fn axis_labels(s: &mut String, x: &str, y: &str) {
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{x}</text>",
        PAD + SIZE / 2.0,
        SIZE + 1.7 * PAD
    );
    let _ = writeln!(
        s,
        "<text x=\"12\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 12 {:.1})\">{y}</text>",
        PAD + SIZE / 2.0,
        PAD + SIZE / 2.0
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Two-dimensional scores with labels and a probability field evaluated on
/// a `grid × grid` lattice spanning `bounds`.
pub struct DecisionPlot<'a> {
    pub title: &'a str,
    pub points: &'a [[f64; 2]],
    pub labels: &'a [i8],
    /// `(x_min, x_max, y_min, y_max)`.
    pub bounds: (f64, f64, f64, f64),
    /// Row-major, `probability[iy * grid + ix]`, `p(+1)`.
    pub probability: &'a [f64],
    pub grid: usize,
}

fn shade(p: f64) -> String {
    let p = p.clamp(0.0, 1.0);
    let r = (255.0 * (0.35 + 0.65 * p)) as u8;
    let b = (255.0 * (0.35 + 0.65 * (1.0 - p))) as u8;
    let g = (255.0 * (0.35 + 0.65 * (1.0 - (2.0 * p - 1.0).abs()))) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub fn decision_svg(plot: &DecisionPlot<'_>, reproducible: bool) -> String {
    let (x0, x1, y0, y1) = plot.bounds;
    let sx = |v: f64| PAD + (v - x0) / (x1 - x0) * SIZE;
    let sy = |v: f64| PAD + SIZE - (v - y0) / (y1 - y0) * SIZE;
    let cell = SIZE / plot.grid as f64;

    let mut s = String::new();
    header(&mut s, reproducible);
    let _ = writeln!(s, "<title>{}</title>", escape(plot.title));
    for iy in 0..plot.grid {
        for ix in 0..plot.grid {
            let p = plot.probability[iy * plot.grid + ix];
            let _ = writeln!(
                s,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\"/>",
                PAD + ix as f64 * cell,
                PAD + SIZE - (iy + 1) as f64 * cell,
                cell + 0.01,
                cell + 0.01,
                shade(p)
            );
        }
    }
    for (pt, &l) in plot.points.iter().zip(plot.labels) {
        let (cx, cy) = (sx(pt[0]), sy(pt[1]));
        if l == 1 {
            let _ = writeln!(s, "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"4\" fill=\"#fff\" stroke=\"#000\"/>");
        } else {
            let _ = writeln!(
                s,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"8\" height=\"8\" fill=\"#000\"/>",
                cx - 4.0,
                cy - 4.0
            );
        }
    }
    axis_labels(&mut s, "PC1", "PC2");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use vistopo_core::persistence::PersistencePoint;

    #[test]
    fn glyphs_and_timestamp() {
        let d = PersistenceDiagram {
            dim0: vec![PersistencePoint::essential(1.0), PersistencePoint::ordinary(2.0, 4.0)],
            dim1: vec![PersistencePoint::extended(7.0, 4.0)],
        };
        let a = diagram_svg(&d, "fig", true);
        assert_eq!(a.matches("<circle").count(), 2);
        assert_eq!(a.matches("<rect").count(), 1);
        assert!(!a.contains("<!--"));
        assert!(diagram_svg(&d, "fig", false).contains("<!-- generated"));
        assert_eq!(a, diagram_svg(&d, "fig", true));
    }
}
