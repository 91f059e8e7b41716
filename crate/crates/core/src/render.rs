//! SVG output for consensus layouts and single tablecloths.
//!
//! Output is plain SVG 1.1 with no external references. Numbers are written
//! with fixed precision so identical inputs give identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EdgeSet, Point2D, Tablecloth};
use crate::layout::ConsensusLayout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub width: f64,
    pub height: f64,
    pub node_radius: f64,
    pub font_size: f64,
    pub stroke_min: f64,
    pub stroke_max: f64,
    pub opacity_min: f64,
    pub opacity_max: f64,
    pub legend_width: f64,
    pub legend_height: f64,
    /// Fraction of the canvas kept free on every side.
    pub margin: f64,
    pub edge_color: String,
    pub node_fill: String,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 600.0,
            node_radius: 14.0,
            font_size: 13.0,
            stroke_min: 0.5,
            stroke_max: 6.0,
            opacity_min: 0.15,
            opacity_max: 1.0,
            legend_width: 180.0,
            legend_height: 10.0,
            margin: 0.1,
            edge_color: "#1f2933".into(),
            node_fill: "#f5f7fa".into(),
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Validation(format!("render style: {m}")));
        if !(self.width > 0.0 && self.height > 0.0) {
            return bad("canvas must have positive size");
        }
        if !(self.stroke_min < self.stroke_max) {
            return bad("stroke_min must be below stroke_max");
        }
        if !(0.0 <= self.opacity_min && self.opacity_min < self.opacity_max && self.opacity_max <= 1.0) {
            return bad("opacities must satisfy 0 <= min < max <= 1");
        }
        if !(0.0..0.5).contains(&self.margin) {
            return bad("margin must be in [0, 0.5)");
        }
        Ok(())
    }

    /// Stroke width for a force in `[0, 1]`.
    pub fn stroke_width(&self, force: f64) -> f64 {
        self.stroke_min + (self.stroke_max - self.stroke_min) * force
    }

    pub fn opacity(&self, force: f64) -> f64 {
        self.opacity_min + (self.opacity_max - self.opacity_min) * force
    }
}

/// Uniform scale plus centering of a bounding box into the canvas, with the
/// y axis flipped.
struct Fit {
    scale: f64,
    cx: f64,
    cy: f64,
    canvas_cx: f64,
    canvas_cy: f64,
}

impl Fit {
    fn new<'a>(points: impl IntoIterator<Item = &'a Point2D>, style: &RenderStyle) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        if x0 > x1 {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let inner_w = style.width * (1.0 - 2.0 * style.margin);
        let inner_h = style.height * (1.0 - 2.0 * style.margin);
        let (bw, bh) = (x1 - x0, y1 - y0);
        let scale = match (bw > 0.0, bh > 0.0) {
            (true, true) => (inner_w / bw).min(inner_h / bh),
            (true, false) => inner_w / bw,
            (false, true) => inner_h / bh,
            (false, false) => 1.0,
        };
        Self {
            scale,
            cx: (x0 + x1) / 2.0,
            cy: (y0 + y1) / 2.0,
            canvas_cx: style.width / 2.0,
            canvas_cy: style.height / 2.0,
        }
    }

    fn apply(&self, p: &Point2D) -> (f64, f64) {
        (
            self.canvas_cx + (p.x - self.cx) * self.scale,
            self.canvas_cy - (p.y - self.cy) * self.scale,
        )
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, style: &RenderStyle) {
    let (w, h) = (style.width, style.height);
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="#ffffff"/>"##);
}

fn node(out: &mut String, (x, y): (f64, f64), label: &str, style: &RenderStyle) {
    let _ = writeln!(
        out,
        r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#,
        r = style.node_radius,
        fill = style.node_fill,
        stroke = style.edge_color,
    );
    let _ = writeln!(
        out,
        r#"<text x="{x:.2}" y="{y:.2}" font-size="{fs:.1}" text-anchor="middle" dominant-baseline="central" fill="{c}">{label}</text>"#,
        fs = style.font_size,
        c = style.edge_color,
        label = escape(label),
    );
}

fn legend(out: &mut String, style: &RenderStyle) {
    let pad = style.height * style.margin;
    let x0 = style.width - style.width * style.margin - style.legend_width;
    let y0 = style.height - pad / 2.0 - style.legend_height / 2.0;
    let (lo, hi) = (style.opacity_min, style.opacity_max);
    let _ = writeln!(out, r#"<defs><linearGradient id="force-gradient" x1="0" y1="0" x2="1" y2="0">"#);
    let _ = writeln!(out, r#"<stop offset="0" stop-color="{}" stop-opacity="{lo:.3}"/>"#, style.edge_color);
    let _ = writeln!(out, r#"<stop offset="1" stop-color="{}" stop-opacity="{hi:.3}"/>"#, style.edge_color);
    let _ = writeln!(out, "</linearGradient></defs>");
    let _ = writeln!(
        out,
        r#"<g class="legend"><rect x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="url(#force-gradient)" stroke="{c}" stroke-width="0.5"/>"#,
        w = style.legend_width,
        h = style.legend_height,
        c = style.edge_color,
    );
    let ty = y0 - 3.0;
    let fs = style.font_size * 0.85;
    let _ = writeln!(out, r#"<text x="{x0:.2}" y="{ty:.2}" font-size="{fs:.1}" text-anchor="start">0%</text>"#);
    let _ = writeln!(
        out,
        r#"<text x="{x1:.2}" y="{ty:.2}" font-size="{fs:.1}" text-anchor="end">100%</text>"#,
        x1 = x0 + style.legend_width
    );
    let _ = writeln!(
        out,
        r#"<text x="{xm:.2}" y="{ty:.2}" font-size="{fs:.1}" text-anchor="middle">tablecloths</text></g>"#,
        xm = x0 + style.legend_width / 2.0
    );
}

/// Consensus graphic: edges with stroke width and opacity linear in force,
/// weakest first and beneath the nodes, plus a 0-100% legend.
pub fn render_consensus(layout: &ConsensusLayout, names: &[String], style: &RenderStyle) -> Result<String> {
    style.validate()?;
    let n = layout.positions.len();
    if names.len() != n {
        return Err(Error::Validation(format!("{} names for {n} samples", names.len())));
    }
    if layout.positions.iter().any(|p| !p.is_finite()) {
        return Err(Error::Validation("layout has non-finite positions".into()));
    }
    let fit = Fit::new(&layout.positions, style);
    let screen: Vec<(f64, f64)> = layout.positions.iter().map(|p| fit.apply(p)).collect();

    let mut edges: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (layout.forces.get(i, j), i, j))
        .filter(|&(f, _, _)| f > 0.0)
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut out = String::new();
    header(&mut out, style);
    legend(&mut out, style);
    let _ = writeln!(out, r#"<g class="edges" stroke="{}" stroke-linecap="round">"#, style.edge_color);
    for (f, i, j) in edges {
        let ((x1, y1), (x2, y2)) = (screen[i], screen[j]);
        let pct = layout.percentages.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);
        let _ = writeln!(
            out,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke-width="{w:.3}" stroke-opacity="{o:.3}"><title>{a} - {b}: {pct}%</title></line>"#,
            w = style.stroke_width(f),
            o = style.opacity(f),
            a = escape(&names[i]),
            b = escape(&names[j]),
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="nodes">"#);
    for (p, name) in screen.iter().zip(names) {
        node(&mut out, *p, name, style);
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Inspection view of one tablecloth: sheet outline, samples at their
/// measured positions and uniform Gabriel edges. `labels` defaults to 1-based
/// sample numbers when empty.
pub fn render_tablecloth(t: &Tablecloth, g: &EdgeSet, labels: &[String], style: &RenderStyle) -> Result<String> {
    style.validate()?;
    let positions = t.positions()?;
    if g.sample_count() != positions.len() {
        return Err(Error::Validation(format!(
            "edge set over {} samples drawn on a tablecloth with {}",
            g.sample_count(),
            positions.len()
        )));
    }
    let corners = [Point2D::new(0.0, 0.0), Point2D::new(t.sheet.width, t.sheet.height)];
    let fit = Fit::new(corners.iter().chain(&positions), style);
    let (sx0, sy0) = fit.apply(&Point2D::new(0.0, t.sheet.height));
    let (sx1, sy1) = fit.apply(&Point2D::new(t.sheet.width, 0.0));

    let mut out = String::new();
    header(&mut out, style);
    let _ = writeln!(
        out,
        r#"<rect class="sheet" x="{sx0:.2}" y="{sy0:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="{c}" stroke-width="1"/>"#,
        w = sx1 - sx0,
        h = sy1 - sy0,
        c = style.edge_color,
    );
    let screen: Vec<(f64, f64)> = positions.iter().map(|p| fit.apply(p)).collect();
    let _ = writeln!(out, r#"<g class="edges" stroke="{}" stroke-width="2">"#, style.edge_color);
    for (i, j) in g.iter() {
        let ((x1, y1), (x2, y2)) = (screen[i], screen[j]);
        let _ = writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="nodes">"#);
    for (i, p) in screen.iter().enumerate() {
        let label = labels.get(i).cloned().unwrap_or_else(|| (i + 1).to_string());
        node(&mut out, *p, &label, style);
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}
