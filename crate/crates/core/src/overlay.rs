//! SVG overlay rendering: raw input boxes in grey, merged segments in
//! blue, the winning model's reference boxes in white.

use std::fmt::Write;

use crate::descriptors::SegmentDescriptor;

const BACKGROUND: &str = "#202020";
const INPUT_STROKE: &str = "#888888";
const MERGED_STROKE: &str = "#4a90d9";
const MODEL_STROKE: &str = "#ffffff";

/// Renders bounding boxes and mass centers of up to three segment layers
/// into a standalone SVG document. Deterministic: fixed attribute order
/// and 3-decimal coordinates.
pub fn render_svg(
    input: &[SegmentDescriptor],
    merged: &[SegmentDescriptor],
    model: Option<&[SegmentDescriptor]>,
) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let all = input
        .iter()
        .chain(merged.iter())
        .chain(model.into_iter().flatten());
    for s in all {
        xs.push(s.x_min);
        xs.push(s.x_max);
        ys.push(s.y_min);
        ys.push(s.y_max);
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let margin = 0.05 * (x1 - x0).max(y1 - y0).max(1.0);
    let (vx, vy) = (x0 - margin, y0 - margin);
    let (vw, vh) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let stroke = 0.002 * vw.max(vh);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.3} {vy:.3} {vw:.3} {vh:.3}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{vx:.3}" y="{vy:.3}" width="{vw:.3}" height="{vh:.3}" fill="{BACKGROUND}"/>"#
    );
    layer(&mut svg, input, INPUT_STROKE, stroke);
    layer(&mut svg, merged, MERGED_STROKE, stroke * 1.5);
    if let Some(model) = model {
        layer(&mut svg, model, MODEL_STROKE, stroke * 1.5);
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn layer(svg: &mut String, segments: &[SegmentDescriptor], color: &str, stroke: f64) {
    for s in segments {
        let _ = writeln!(
            svg,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="{color}" stroke-width="{stroke:.3}"/>"#,
            s.x_min,
            s.y_min,
            s.width(),
            s.height(),
        );
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="{color}"/>"#,
            s.cx,
            s.cy,
            stroke * 2.0,
        );
    }
}
