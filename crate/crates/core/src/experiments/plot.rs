//! Minimal hand-written SVG: line plots and 2D heatmaps with one contour.

use std::fmt::Write as _;
use std::path::Path;

use crate::fields::{Mask, ScalarField};

use super::{ExperimentError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const HEATMAP_CELLS: usize = 200;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Curve {
    pub fn solid(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.to_string(),
            points,
            dashed: false,
        }
    }

    pub fn dashed(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.to_string(),
            points,
            dashed: true,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Plot {
    Lines {
        title: String,
        x_label: String,
        y_label: String,
        log_x: bool,
        log_y: bool,
        curves: Vec<Curve>,
    },
    /// 2D field as colored cells; masked-out nodes are drawn grey.
    Heatmap {
        title: String,
        field: ScalarField<f64>,
        mask: Option<Mask<f64>>,
        contour: Option<f64>,
    },
}

pub fn emit_svg(plot: &Plot, path: &Path) -> Result<()> {
    let svg = render_svg(plot)?;
    std::fs::write(path, svg).map_err(|e| ExperimentError::io(path, e))
}

pub fn render_svg(plot: &Plot) -> Result<String> {
    match plot {
        Plot::Lines {
            title,
            x_label,
            y_label,
            log_x,
            log_y,
            curves,
        } => Ok(lines(title, x_label, y_label, *log_x, *log_y, curves)),
        Plot::Heatmap {
            title,
            field,
            mask,
            contour,
        } => heatmap(title, field, mask.as_ref(), *contour),
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn tick_label(&self, t: f64) -> String {
        let v = self.lo + t * (self.hi - self.lo);
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3}")
        }
    }
}

fn lines(
    title: &str,
    x_label: &str,
    y_label: &str,
    log_x: bool,
    log_y: bool,
    curves: &[Curve],
) -> String {
    let usable = |c: &Curve| -> Vec<(f64, f64)> {
        c.points
            .iter()
            .copied()
            .filter(|&(x, y)| {
                x.is_finite() && y.is_finite() && (!log_x || x > 0.0) && (!log_y || y > 0.0)
            })
            .collect()
    };
    let data: Vec<Vec<(f64, f64)>> = curves.iter().map(usable).collect();
    let ax = Axis::fit(data.iter().flatten().map(|p| p.0), log_x);
    let ay = Axis::fit(data.iter().flatten().map(|p| p.1), log_y);
    let px = |x: f64| MARGIN + ax.unit(x) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - ay.unit(y) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, title);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let x = x0 + t * (x1 - x0);
        let y = y0 - t * (y0 - y1);
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            ax.tick_label(t)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            ay.tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (k, (curve, pts)) in curves.iter().zip(&data).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let dash = if curve.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let mut poly = String::new();
        for &(x, y) in pts {
            let _ = write!(poly, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            poly.trim_end()
        );
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            x1 - 150.0,
            x1 - 120.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            x1 - 114.0,
            ly + 4.0,
            escape(&curve.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Piecewise-linear color ramp on `t` in `[0, 1]`.
fn color(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [48.0, 18.0, 59.0]),
        (0.25, [40.0, 120.0, 200.0]),
        (0.5, [60.0, 190.0, 120.0]),
        (0.75, [240.0, 200.0, 40.0]),
        (1.0, [180.0, 20.0, 20.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let k = STOPS
        .iter()
        .position(|s| s.0 >= t)
        .unwrap_or(STOPS.len() - 1)
        .max(1);
    let (t0, c0) = STOPS[k - 1];
    let (t1, c1) = STOPS[k];
    let w = (t - t0) / (t1 - t0);
    let c: Vec<u8> = (0..3)
        .map(|i| (c0[i] + w * (c1[i] - c0[i])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn heatmap(
    title: &str,
    field: &ScalarField<f64>,
    mask: Option<&Mask<f64>>,
    contour: Option<f64>,
) -> Result<String> {
    let g = field.grid();
    if g.dim() != 2 {
        return Err(ExperimentError::Config("heatmap needs a 2D field".into()));
    }
    let (nx, ny) = (g.nodes(0), g.nodes(1));
    // node subsample so the picture stays within HEATMAP_CELLS per axis
    let stride = nx.max(ny).div_ceil(HEATMAP_CELLS).max(1);
    let xs: Vec<usize> = (0..nx).step_by(stride).collect();
    let ys: Vec<usize> = (0..ny).step_by(stride).collect();
    let sample = |i: usize, j: usize| -> Option<f64> {
        let idx = g.index(i, j);
        if mask.is_some_and(|m| !m.get(idx)) {
            None
        } else {
            Some(field.get(idx))
        }
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &j in &ys {
        for &i in &xs {
            if let Some(v) = sample(i, j) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let side = (HEIGHT - 2.0 * MARGIN).min(WIDTH - 2.0 * MARGIN);
    let cw = side / xs.len() as f64;
    let ch = side / ys.len() as f64;
    let left = (WIDTH - side) / 2.0;
    let top = MARGIN;

    let mut out = String::new();
    header(&mut out, title);
    for (row, &j) in ys.iter().enumerate() {
        let y = top + side - (row as f64 + 1.0) * ch;
        for (col, &i) in xs.iter().enumerate() {
            let fill = match sample(i, j) {
                Some(v) => color((v - lo) / (hi - lo)),
                None => "#cccccc".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                left + col as f64 * cw,
                y,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    if let Some(level) = contour {
        let values: Vec<Vec<f64>> = ys
            .iter()
            .map(|&j| xs.iter().map(|&i| field.get(g.index(i, j))).collect())
            .collect();
        let segs = marching_squares(&values, level);
        let mut d = String::new();
        for ((x0, y0), (x1, y1)) in segs {
            let map = |cx: f64, cy: f64| (left + (cx + 0.5) * cw, top + side - (cy + 0.5) * ch);
            let (a0, b0) = map(x0, y0);
            let (a1, b1) = map(x1, y1);
            let _ = write!(d, "M{a0:.2} {b0:.2}L{a1:.2} {b1:.2}");
        }
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="black" stroke-width="1.5"/>"#
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">range [{lo:.4}, {hi:.4}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}

type Segment = ((f64, f64), (f64, f64));

/// Level-set segments of a row-major sample array, in sample index units.
fn marching_squares(values: &[Vec<f64>], level: f64) -> Vec<Segment> {
    let mut segs = Vec::new();
    let rows = values.len();
    if rows < 2 {
        return segs;
    }
    let cols = values[0].len();
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            // corners counter-clockwise from bottom-left
            let v = [
                values[r][c],
                values[r][c + 1],
                values[r + 1][c + 1],
                values[r + 1][c],
            ];
            let p = [
                (c as f64, r as f64),
                (c as f64 + 1.0, r as f64),
                (c as f64 + 1.0, r as f64 + 1.0),
                (c as f64, r as f64 + 1.0),
            ];
            let mut crossings = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                let (va, vb) = (v[a] - level, v[b] - level);
                if (va < 0.0) != (vb < 0.0) {
                    let t = va / (va - vb);
                    crossings.push((
                        p[a].0 + t * (p[b].0 - p[a].0),
                        p[a].1 + t * (p[b].1 - p[a].1),
                    ));
                }
            }
            if crossings.len() == 2 {
                segs.push((crossings[0], crossings[1]));
            } else if crossings.len() == 4 {
                segs.push((crossings[0], crossings[1]));
                segs.push((crossings[2], crossings[3]));
            }
        }
    }
    segs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;

    #[test]
    fn line_plot_has_one_polyline_per_curve() {
        let plot = Plot::Lines {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y: false,
            curves: vec![
                Curve::solid("a", vec![(0.0, 0.0), (1.0, 1.0)]),
                Curve::dashed("b", vec![(0.0, 1.0), (1.0, 0.0)]),
            ],
        };
        let svg = render_svg(&plot).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn circle_contour_is_closed_ring() {
        let values: Vec<Vec<f64>> = (0..21)
            .map(|r| {
                (0..21)
                    .map(|c| ((r as f64 - 10.0).powi(2) + (c as f64 - 10.0).powi(2)).sqrt() - 5.0)
                    .collect()
            })
            .collect();
        let segs = marching_squares(&values, 0.0);
        assert!(!segs.is_empty());
        for ((x0, y0), (x1, y1)) in segs {
            for (x, y) in [(x0, y0), (x1, y1)] {
                let r = ((x - 10.0).powi(2) + (y - 10.0).powi(2)).sqrt();
                assert!((r - 5.0).abs() < 0.2, "{r}");
            }
        }
    }

    #[test]
    fn heatmap_requires_2d() {
        let g = Grid::new_1d(5, 0.0, 1.0).unwrap();
        let plot = Plot::Heatmap {
            title: "t".into(),
            field: ScalarField::constant(g, 1.0),
            mask: None,
            contour: None,
        };
        assert!(render_svg(&plot).is_err());
        let g = Grid::new_2d([9, 9], [0.0, 0.0], [1.0, 1.0]).unwrap();
        let plot = Plot::Heatmap {
            title: "t".into(),
            field: ScalarField::from_fn(g, |p| p[0] - 0.5),
            mask: None,
            contour: Some(0.0),
        };
        let svg = render_svg(&plot).unwrap();
        assert_eq!(svg.matches("<rect").count(), 82);
        assert!(svg.contains("<path d=\"M"));
    }
}
