use std::fmt::Write;

use super::format::format_f64;
use crate::geometry::{SimplicialBody, Vector};
use crate::{Error, Result};

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 20.0;
const LEGEND: f64 = 40.0;

/// Inputs of a mesh report: cells colored by a nonnegative per-cell value, with an
/// optional vertex loop drawn on top.
#[derive(Clone, Debug)]
pub struct SvgReport<'a> {
    pub body: &'a SimplicialBody,
    /// Vertex positions to draw.
    pub coords: &'a [Vector],
    pub cell_values: &'a [f64],
    pub loop_vertices: Option<&'a [usize]>,
    pub title: &'a str,
}

fn shade(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let g = (255.0 - 200.0 * t).round() as u8;
    format!("#ff{g:02x}{g:02x}")
}

pub fn render_svg(report: &SvgReport<'_>) -> Result<String> {
    let body = report.body;
    if body.dim() != 2 {
        return Err(Error::Dimension("SVG reports are 2D only".into()));
    }
    if report.coords.len() != body.num_vertices() || report.cell_values.len() != body.num_cells() {
        return Err(Error::Dimension("report arrays do not match the mesh".into()));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in report.coords {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let s = (WIDTH - 2.0 * MARGIN) / span;
    let height = (hi[1] - lo[1]) * s + 2.0 * MARGIN + LEGEND;
    let xy = |p: &Vector| (MARGIN + (p[0] - lo[0]) * s, MARGIN + (hi[1] - p[1]) * s);

    let max = report.cell_values.iter().copied().fold(0.0, f64::max);
    let min = report.cell_values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.2}" viewBox="0 0 {WIDTH:.0} {height:.2}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(report.title));
    let _ = writeln!(out, r##"<g stroke="#555555" stroke-width="0.5">"##);
    for (c, &value) in report.cell_values.iter().enumerate() {
        let points: Vec<String> = body
            .cell(c)
            .iter()
            .map(|&v| {
                let (x, y) = xy(&report.coords[v]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let t = if max > 0.0 { value / max } else { 0.0 };
        let _ = writeln!(out, r#"<polygon points="{}" fill="{}"/>"#, points.join(" "), shade(t));
    }
    let _ = writeln!(out, "</g>");
    if let Some(lp) = report.loop_vertices {
        let points: Vec<String> = lp
            .iter()
            .filter(|&&v| v < report.coords.len())
            .map(|&v| {
                let (x, y) = xy(&report.coords[v]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#1f4fd0" stroke-width="2"/>"##,
            points.join(" ")
        );
    }
    let ly = height - LEGEND / 2.0;
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN:.0}" y="{:.2}" width="16" height="16" fill="{}"/><rect x="{:.0}" y="{:.2}" width="16" height="16" fill="{}"/>"#,
        ly - 12.0,
        shade(0.0),
        MARGIN + 20.0,
        ly - 12.0,
        shade(1.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.0}" y="{ly:.2}" font-family="monospace" font-size="12">incompatibility residual: min {} max {}</text>"#,
        MARGIN + 44.0,
        format_f64(if min.is_finite() { min } else { 0.0 }),
        format_f64(max)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_values_give_plain_legend() {
        let body = SimplicialBody::grid_2d(2, 2, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let values = vec![0.0; body.num_cells()];
        let ring = [0, 1, 4, 3, 0];
        let svg = render_svg(&SvgReport {
            body: &body,
            coords: body.ref_coords(),
            cell_values: &values,
            loop_vertices: Some(&ring),
            title: "a<b",
        })
        .unwrap();
        assert_eq!(svg.matches("<polygon").count(), 8);
        assert!(svg.contains("min 0.0000000000000000e0 max 0.0000000000000000e0"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("a&lt;b"));
    }
}
