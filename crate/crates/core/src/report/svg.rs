//! Static SVG renderings: iso-PIV contours over the plausible region and
//! the two-density power picture.

use std::fmt::Write as _;

use super::grid::{ContourGrid, PlausibleRegion};
use super::power::PowerFigure;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

pub const ISO_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// A line segment in data coordinates `(treated_un, control_un)`.
pub type Segment = ((f64, f64), (f64, f64));

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = self.x.1 - self.x.0;
        let t = if span == 0.0 {
            0.5
        } else {
            (x - self.x.0) / span
        };
        MARGIN + t * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let span = self.y.1 - self.y.0;
        let t = if span == 0.0 {
            0.5
        } else {
            (y - self.y.0) / span
        };
        HEIGHT - MARGIN - t * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let _ = writeln!(
            out,
            r#"<rect x="{m}" y="{m}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
            m = MARGIN,
            w = WIDTH - 2.0 * MARGIN,
            h = HEIGHT - 2.0 * MARGIN
        );
        for (v, anchor) in [(self.x.0, "start"), (self.x.1, "end")] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="{anchor}">{}</text>"#,
                self.px(v),
                HEIGHT - MARGIN + 16.0,
                fmt_tick(v)
            );
        }
        for v in [self.y.0, self.y.1] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                self.py(v) + 4.0,
                fmt_tick(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{x_label}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_label}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0
        );
    }
}

fn fmt_tick(v: f64) -> String {
    format!("{:.2}", v)
}

fn header() -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    ) + "\n"
}

/// Marching squares over a row-major `values[c][t]` field.
pub fn iso_segments(
    treated: &[f64],
    control: &[f64],
    values: &[Vec<f64>],
    level: f64,
) -> Vec<Segment> {
    let mut segments = Vec::new();
    let lerp = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        let (x0, y0, v0) = a;
        let (x1, y1, v1) = b;
        let t = if v1 == v0 {
            0.5
        } else {
            (level - v0) / (v1 - v0)
        };
        (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
    };
    for ci in 0..control.len().saturating_sub(1) {
        for ti in 0..treated.len().saturating_sub(1) {
            // corners counter-clockwise from bottom-left
            let corners = [
                (treated[ti], control[ci], values[ci][ti]),
                (treated[ti + 1], control[ci], values[ci][ti + 1]),
                (treated[ti + 1], control[ci + 1], values[ci + 1][ti + 1]),
                (treated[ti], control[ci + 1], values[ci + 1][ti]),
            ];
            let mut crossings = Vec::with_capacity(4);
            for k in 0..4 {
                let a = corners[k];
                let b = corners[(k + 1) % 4];
                if (a.2 >= level) != (b.2 >= level) {
                    crossings.push(lerp(a, b));
                }
            }
            match crossings.len() {
                2 => segments.push((crossings[0], crossings[1])),
                4 => {
                    // saddle: resolve by the cell-centre value
                    let centre = corners.iter().map(|c| c.2).sum::<f64>() / 4.0;
                    if (centre >= level) == (corners[0].2 >= level) {
                        segments.push((crossings[0], crossings[3]));
                        segments.push((crossings[1], crossings[2]));
                    } else {
                        segments.push((crossings[0], crossings[1]));
                        segments.push((crossings[2], crossings[3]));
                    }
                }
                _ => {}
            }
        }
    }
    segments
}

pub fn contour_svg(grid: &ContourGrid, region: &PlausibleRegion) -> String {
    let treated = region.treated_axis();
    let control = region.control_axis();
    let n_t = treated.len();
    let values: Vec<Vec<f64>> = grid
        .rows
        .chunks(n_t)
        .map(|chunk| chunk.iter().map(|r| r.piv).collect())
        .collect();
    let frame = Frame {
        x: region.treated_un_range,
        y: region.control_un_range,
    };

    let mut out = header();
    frame.axes(&mut out, "Ytun", "Ycun");
    for level in ISO_LEVELS {
        let segs = iso_segments(&treated, &control, &values, level);
        if segs.is_empty() {
            continue;
        }
        let mut d = String::new();
        for ((x0, y0), (x1, y1)) in &segs {
            let _ = write!(
                d,
                "M{:.2} {:.2}L{:.2} {:.2}",
                frame.px(*x0),
                frame.py(*y0),
                frame.px(*x1),
                frame.py(*y1)
            );
        }
        let _ = writeln!(
            out,
            r#"<path class="iso" data-level="{level}" d="{d}" fill="none" stroke="steelblue" stroke-width="1.2"/>"#
        );
        let ((lx, ly), _) = segs[segs.len() / 2];
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="steelblue">{level}</text>"#,
            frame.px(lx) + 3.0,
            frame.py(ly) - 3.0
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn power_svg(fig: &PowerFigure) -> String {
    let rows = &fig.data.rows;
    let x_range = (rows[0].x, rows[rows.len() - 1].x);
    let y_max = rows
        .iter()
        .map(|r| r.null_density.max(r.alt_density))
        .fold(0.0, f64::max);
    let frame = Frame {
        x: x_range,
        y: (0.0, y_max * 1.05),
    };
    // keep the path size bounded on very fine grids
    let stride = (rows.len() / 800).max(1);
    let sampled: Vec<_> = rows
        .iter()
        .enumerate()
        .filter(|(i, r)| i % stride == 0 || r.x == fig.threshold_value || *i == rows.len() - 1)
        .map(|(_, r)| r)
        .collect();

    let mut out = header();
    frame.axes(&mut out, "effect", "density");

    let shaded: Vec<_> = sampled.iter().filter(|r| r.is_rejection_region).collect();
    if let (Some(first), Some(last)) = (shaded.first(), shaded.last()) {
        let mut d = format!("M{:.2} {:.2}", frame.px(first.x), frame.py(0.0));
        for r in &shaded {
            let _ = write!(d, "L{:.2} {:.2}", frame.px(r.x), frame.py(r.alt_density));
        }
        let _ = write!(d, "L{:.2} {:.2}Z", frame.px(last.x), frame.py(0.0));
        let _ = writeln!(
            out,
            r#"<path class="piv" d="{d}" fill="grey" fill-opacity="0.5" stroke="none"/>"#
        );
    }
    for (class, dash, pick) in [
        (
            "null",
            "",
            (|r: &super::power::PowerRow| r.null_density) as fn(&_) -> f64,
        ),
        (
            "alternative",
            r#" stroke-dasharray="6 4""#,
            |r: &super::power::PowerRow| r.alt_density,
        ),
    ] {
        let mut d = String::new();
        for (i, r) in sampled.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2} {:.2}", frame.px(r.x), frame.py(pick(r)));
        }
        let _ = writeln!(
            out,
            r#"<path class="{class}" d="{d}" fill="none" stroke="black" stroke-width="1.2"{dash}/>"#
        );
    }
    let tx = frame.px(fig.threshold_value);
    let _ = writeln!(
        out,
        r#"<line class="threshold" x1="{tx:.2}" y1="{:.2}" x2="{tx:.2}" y2="{:.2}" stroke="firebrick"/>"#,
        frame.py(0.0),
        frame.py(y_max * 1.05)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12">PIV = {:.4}</text>"#,
        MARGIN + 8.0,
        MARGIN + 16.0,
        fig.shaded_mass_cdf
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_contour() {
        // v = x + y on the unit square, level 1 is the anti-diagonal
        let axis: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let values: Vec<Vec<f64>> = axis
            .iter()
            .map(|&y| axis.iter().map(|&x| x + y).collect())
            .collect();
        let segs = iso_segments(&axis, &axis, &values, 1.05);
        assert!(!segs.is_empty());
        for ((x0, y0), (x1, y1)) in segs {
            assert!((x0 + y0 - 1.05).abs() < 1e-12);
            assert!((x1 + y1 - 1.05).abs() < 1e-12);
        }
    }

    #[test]
    fn no_crossing_no_segments() {
        let axis = vec![0.0, 1.0];
        let values = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(iso_segments(&axis, &axis, &values, 0.5).is_empty());
    }
}
