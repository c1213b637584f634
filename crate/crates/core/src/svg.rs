//! Deterministic SVG rendering of carved regions, decision partitions, level
//! sets and loss grids. Coordinates are printed with a fixed number of
//! decimals and elements are emitted in a fixed order, so identical input
//! gives identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::arrangement::BoundingBox;
use crate::carver::{CarvedRegion, DecisionLabel, DecisionPartition, PolynomialCell, Polyline};
use crate::netspec::Network;
use crate::rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvgError {
    #[error("nothing to draw")]
    EmptyGeometry,
    #[error("box must be two-dimensional")]
    BadBox,
}

pub type Result<T> = std::result::Result<T, SvgError>;

#[derive(Clone, Debug)]
pub struct SvgStyle {
    /// Side length of the square drawing area in pixels.
    pub size: f64,
    pub margin: f64,
    pub stroke_width: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            size: 600.0,
            margin: 10.0,
            stroke_width: 1.0,
        }
    }
}

const REGION_FILLS: [&str; 8] = [
    "#fbb4ae", "#b3cde3", "#ccebc5", "#decbe4", "#fed9a6", "#ffffcc", "#e5d8bd", "#fddaec",
];
const LAYER_STROKES: [&str; 6] = ["#d7191c", "#2b83ba", "#1a9641", "#7b3294", "#fdae61", "#404040"];

fn decision_fill(label: DecisionLabel) -> &'static str {
    match label {
        DecisionLabel::Cat => "#f4a582",
        DecisionLabel::Dog => "#92c5de",
        DecisionLabel::Indecision => "#f7f7f7",
    }
}

/// `-0.0000` prints as `0.0000` so mirrored inputs compare equal.
fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

struct Frame {
    lo: [f64; 2],
    hi: [f64; 2],
    style: SvgStyle,
}

impl Frame {
    fn new(bbox: &BoundingBox, style: &SvgStyle) -> Result<Self> {
        if bbox.dim() != 2 {
            return Err(SvgError::BadBox);
        }
        Ok(Frame {
            lo: [rational::to_f64(&bbox.lo[0]), rational::to_f64(&bbox.lo[1])],
            hi: [rational::to_f64(&bbox.hi[0]), rational::to_f64(&bbox.hi[1])],
            style: style.clone(),
        })
    }

    /// Data coordinates to pixels, y pointing up.
    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let s = self.style.size;
        let m = self.style.margin;
        (
            m + (p[0] - self.lo[0]) / (self.hi[0] - self.lo[0]) * s,
            m + (self.hi[1] - p[1]) / (self.hi[1] - self.lo[1]) * s,
        )
    }

    fn points(&self, pts: &[[f64; 2]]) -> String {
        pts.iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{},{}", num(x), num(y))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn header(style: &SvgStyle, css: &str) -> String {
    let full = style.size + 2.0 * style.margin;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">"#,
        w = num(full)
    );
    let _ = writeln!(s, "<style>\n{css}</style>");
    s
}

fn layer_css(layers: usize, stroke_width: f64) -> String {
    let mut css = String::new();
    for k in 1..=layers {
        let _ = writeln!(
            css,
            ".layer-{k} {{ stroke: {}; stroke-width: {}; fill: none; }}",
            LAYER_STROKES[(k - 1) % LAYER_STROKES.len()],
            num(stroke_width * 2.0)
        );
    }
    css
}

/// Bend-line segments of the given polygons keyed by the producing neuron,
/// each shared edge kept once, sorted by layer then position.
fn bend_segments<'a>(
    net: &Network,
    polys: impl Iterator<Item = &'a crate::geometry::Polygon>,
) -> Vec<(usize, [f64; 4])> {
    let layers = net.relu_layers();
    let mut seen: BTreeMap<(usize, [i64; 4]), [f64; 4]> = BTreeMap::new();
    for poly in polys {
        let v = poly.vertices_f64();
        for (k, label) in poly.labels.iter().enumerate() {
            let Some(neuron) = *label else { continue };
            let Some(layer) = layers.get(neuron).copied().flatten() else {
                continue;
            };
            let a = v[k];
            let b = v[(k + 1) % v.len()];
            let (a, b) = if (a[0], a[1]) <= (b[0], b[1]) { (a, b) } else { (b, a) };
            // quantised key merges the two copies of a shared edge
            let q = |t: f64| (t * 1e9).round() as i64;
            seen.entry((layer, [q(a[0]), q(a[1]), q(b[0]), q(b[1])])).or_insert([a[0], a[1], b[0], b[1]]);
        }
    }
    seen.into_iter().map(|((layer, _), seg)| (layer, seg)).collect()
}

fn push_lines(s: &mut String, frame: &Frame, segs: &[(usize, [f64; 4])]) {
    for (layer, seg) in segs {
        let (x1, y1) = frame.map([seg[0], seg[1]]);
        let (x2, y2) = frame.map([seg[2], seg[3]]);
        let _ = writeln!(
            s,
            r#"<line class="layer-{layer}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }
}

/// One `<polygon>` per region (in the given order), then the bend-lines of
/// every ReLU layer `k` as `<line class="layer-k">`. With a decision
/// partition the region fills are replaced by the Cat/Dog/Indecision pieces.
pub fn render_regions(
    net: &Network,
    regions: &[CarvedRegion],
    bbox: &BoundingBox,
    decision: Option<&DecisionPartition>,
    style: &SvgStyle,
) -> Result<String> {
    if regions.is_empty() {
        return Err(SvgError::EmptyGeometry);
    }
    let frame = Frame::new(bbox, style)?;
    let depth = net.relu_layers().iter().flatten().copied().max().unwrap_or(0);
    let mut css = String::from(".region { stroke: #808080; }\n.decision { stroke: none; }\n");
    css.push_str(&layer_css(depth, style.stroke_width));
    let mut s = header(style, &css);
    s.push_str("<g id=\"regions\">\n");
    for (k, r) in regions.iter().enumerate() {
        let fill = if decision.is_some() { "none" } else { REGION_FILLS[k % REGION_FILLS.len()] };
        let _ = writeln!(
            s,
            r#"<polygon class="region" data-pattern="{}" fill="{fill}" stroke-width="{}" points="{}"/>"#,
            r.pattern,
            num(style.stroke_width * 0.5),
            frame.points(&r.polygon.vertices_f64())
        );
    }
    s.push_str("</g>\n");
    if let Some(d) = decision {
        s.push_str("<g id=\"decision\">\n");
        for p in &d.pieces {
            let _ = writeln!(
                s,
                r#"<polygon class="decision" data-label="{}" fill="{}" fill-opacity="0.6" points="{}"/>"#,
                p.label,
                decision_fill(p.label),
                frame.points(&p.polygon.vertices_f64())
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("<g id=\"bend-lines\">\n");
    push_lines(&mut s, &frame, &bend_segments(net, regions.iter().map(|r| &r.polygon)));
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Cells of a multiplication network drawn as their labelled grid points,
/// with optional level-set polylines on top.
pub fn render_cells(cells: &[PolynomialCell], levels: &[Polyline], bbox: &BoundingBox, style: &SvgStyle) -> Result<String> {
    if cells.is_empty() && levels.is_empty() {
        return Err(SvgError::EmptyGeometry);
    }
    let frame = Frame::new(bbox, style)?;
    let npts: usize = cells.iter().map(|c| c.points.len()).sum::<usize>().max(1);
    let side = style.size / (npts as f64).sqrt();
    let css = ".level { stroke: #000000; fill: none; }\n";
    let mut s = header(style, css);
    for (k, c) in cells.iter().enumerate() {
        let _ = writeln!(s, r#"<g class="cell" data-pattern="{}" fill="{}">"#, c.pattern, REGION_FILLS[k % REGION_FILLS.len()]);
        for &p in &c.points {
            let (x, y) = frame.map(p);
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                num(x - side / 2.0),
                num(y - side / 2.0),
                num(side),
                num(side)
            );
        }
        s.push_str("</g>\n");
    }
    for line in levels {
        let _ = writeln!(
            s,
            r#"<polyline class="level" stroke-width="{}" points="{}"/>"#,
            num(style.stroke_width * 1.5),
            frame.points(line)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Linear blue–yellow ramp on `t ∈ [0, 1]`.
fn ramp(t: f64) -> String {
    const STOPS: [[f64; 3]; 3] = [[68.0, 1.0, 84.0], [33.0, 145.0, 140.0], [253.0, 231.0, 37.0]];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let k = (t.floor() as usize).min(1);
    let f = t - k as f64;
    let c: Vec<u8> = (0..3).map(|i| (STOPS[k][i] + f * (STOPS[k + 1][i] - STOPS[k][i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// A `grid × grid` heatmap; row `i` of `values` runs left to right along the
/// first direction, column `j` bottom to top along the second. Non-finite
/// cells are grey.
pub fn render_heatmap(grid: usize, values: &[f64], style: &SvgStyle) -> Result<String> {
    if grid == 0 || values.len() != grid * grid {
        return Err(SvgError::EmptyGeometry);
    }
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell = style.size / grid as f64;
    let mut s = header(style, "rect { stroke: none; }\n");
    let _ = writeln!(s, r#"<g id="heatmap" data-min="{}" data-max="{}">"#, num(lo), num(hi));
    for i in 0..grid {
        for j in 0..grid {
            let v = values[i * grid + j];
            let fill = if v.is_finite() { ramp((v - lo) / span) } else { "#808080".to_string() };
            let x = style.margin + i as f64 * cell;
            let y = style.margin + (grid - 1 - j) as f64 * cell;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                num(x),
                num(y),
                num(cell),
                num(cell)
            );
        }
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}
