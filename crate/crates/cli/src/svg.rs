//! Minimal SVG emitter for table drawings and section scatter plots.
//!
//! Coordinates are printed with a fixed number of decimals so that repeated
//! runs produce byte-identical files.

use std::f64::consts::PI;
use std::fmt::Write;

use string_billiard::{StringTable, Vec2};

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 24.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// An SVG document under construction, with a linear map from data to page
/// coordinates (y up in data, down on the page).
pub struct Figure {
    body: String,
    lo: Vec2,
    scale: (f64, f64),
    height: f64,
    title: String,
}

impl Figure {
    fn new(lo: Vec2, hi: Vec2, width: f64, height: f64, title: &str) -> Figure {
        let span = hi - lo;
        Figure {
            body: String::new(),
            lo,
            scale: ((width - 2.0 * MARGIN) / span.x, (height - 2.0 * MARGIN) / span.y),
            height,
            title: title.to_string(),
        }
    }

    /// A figure framing `table`, with its boundary and the polygon K drawn.
    pub fn table(table: &StringTable, title: &str) -> Figure {
        let (lo, hi) = table.bounding_box();
        let pad = 0.03 * (hi - lo).hypot();
        let lo = lo - Vec2::new(pad, pad);
        let hi = hi + Vec2::new(pad, pad);
        let height = MARGIN * 2.0 + (WIDTH - 2.0 * MARGIN) * (hi.y - lo.y) / (hi.x - lo.x);
        let mut fig = Figure::new(lo, hi, WIDTH, height, title);
        fig.polygon(&table.sample_boundary(96), "none", "#000000", 1.5, None);
        fig.polygon(&table.foci, "none", "#888888", 1.0, Some("4 3"));
        for f in &table.foci {
            fig.dot(*f, 2.5, "#888888");
        }
        fig
    }

    /// An `(s, θ)` plot over `[0, L] × [0, π]`.
    pub fn section(boundary_length: f64, title: &str) -> Figure {
        let mut fig = Figure::new(Vec2::ZERO, Vec2::new(boundary_length, PI), WIDTH, 0.62 * WIDTH, title);
        let corners = [
            Vec2::ZERO,
            Vec2::new(boundary_length, 0.0),
            Vec2::new(boundary_length, PI),
            Vec2::new(0.0, PI),
        ];
        fig.polygon(&corners, "none", "#000000", 1.0, None);
        for j in 1..6 {
            let s = boundary_length * j as f64 / 6.0;
            fig.polyline(&[Vec2::new(s, 0.0), Vec2::new(s, PI)], "#cccccc", 0.5);
        }
        fig.polyline(&[Vec2::new(0.0, PI / 2.0), Vec2::new(boundary_length, PI / 2.0)], "#cccccc", 0.5);
        fig
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.lo.x) * self.scale.0,
            self.height - MARGIN - (p.y - self.lo.y) * self.scale.1,
        )
    }

    fn points_attr(&self, pts: &[Vec2]) -> String {
        let mut out = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.map(*p);
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x:.2},{y:.2}");
        }
        out
    }

    pub fn polyline(&mut self, pts: &[Vec2], stroke: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let attr = self.points_attr(pts);
        let _ = writeln!(
            self.body,
            r#"<polyline points="{attr}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn polygon(&mut self, pts: &[Vec2], fill: &str, stroke: &str, width: f64, dash: Option<&str>) {
        if pts.len() < 3 {
            return;
        }
        let attr = self.points_attr(pts);
        let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let opacity = if fill == "none" { "" } else { r#" fill-opacity="0.35""# };
        let _ = writeln!(
            self.body,
            r#"<polygon points="{attr}" fill="{fill}"{opacity} stroke="{stroke}" stroke-width="{width}"{dash}/>"#
        );
    }

    pub fn dot(&mut self, p: Vec2, r: f64, fill: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#);
    }

    /// Many small dots in one group, for scatter plots.
    pub fn scatter(&mut self, pts: &[Vec2], r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<g fill="{fill}">"#);
        for p in pts {
            let (x, y) = self.map(*p);
            let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}"/>"#);
        }
        self.body.push_str("</g>\n");
    }

    pub fn finish(self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{h:.0}" viewBox="0 0 {WIDTH:.0} {h:.0}">"#,
            h = self.height
        );
        let _ = writeln!(out, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
        out.push_str(&self.body);
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN}" y="16" font-family="sans-serif" font-size="12">{}</text>"#,
            escape(&self.title)
        );
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use string_billiard::{build_table, Frame};

    #[test]
    fn table_figure_is_well_formed() {
        let table = build_table(6, Frame::HexagonCanonical).unwrap();
        let mut fig = Figure::table(&table, "a < b & c");
        fig.polyline(&[Vec2::ZERO, Vec2::new(1.0, 1.0)], "#ff0000", 1.0);
        let svg = fig.finish();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(svg.contains("a &lt; b &amp; c"));
    }

    #[test]
    fn section_axes_map_to_the_frame() {
        let fig = Figure::section(10.0, "s");
        assert_eq!(fig.map(Vec2::ZERO), (MARGIN, fig.height - MARGIN));
        let (x, y) = fig.map(Vec2::new(10.0, PI));
        assert!((x - (WIDTH - MARGIN)).abs() < 1e-9 && (y - MARGIN).abs() < 1e-9);
    }
}
