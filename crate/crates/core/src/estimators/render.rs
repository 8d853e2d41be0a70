use std::fmt::Write as _;

use crate::error::{check_len, Result};
use crate::geometry::{Point2, VoronoiDiagram};

/// Piecewise linear blue-green-yellow ramp.
fn color(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let x = t * (STOPS.len() - 1) as f64;
    let k = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |u: f64, v: f64| (u + f * (v - u)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

fn on_square_side(a: Point2, b: Point2) -> bool {
    let same = |u: f64, v: f64, edge: f64| (u - edge).abs() < 1e-12 && (v - edge).abs() < 1e-12;
    same(a.x, b.x, 0.0) || same(a.x, b.x, 1.0) || same(a.y, b.y, 0.0) || same(a.y, b.y, 1.0)
}

/// SVG of the cells filled by value, with one `<path class="region">`
/// outline per constant region in `labels`. `note` is printed in the corner.
pub fn render_svg(
    diagram: &VoronoiDiagram,
    values: &[f64],
    labels: &[usize],
    size: f64,
    note: Option<&str>,
) -> Result<String> {
    check_len(diagram.len(), values.len())?;
    check_len(diagram.len(), labels.len())?;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let px = |p: Point2| (p.x * size, (1.0 - p.y) * size);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    for (cell, v) in diagram.cells.iter().zip(values) {
        let pts: Vec<String> = cell
            .iter()
            .map(|&p| {
                let (x, y) = px(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{}" stroke="none"/>"#,
            pts.join(" "),
            color((v - lo) / span)
        );
    }

    let regions = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut outline: Vec<String> = vec![String::new(); regions];
    let mut seg = |r: usize, a: Point2, b: Point2| {
        let ((x0, y0), (x1, y1)) = (px(a), px(b));
        let _ = write!(outline[r], "M{x0:.3},{y0:.3}L{x1:.3},{y1:.3}");
    };
    for f in &diagram.facets {
        let (a, b) = (labels[f.i], labels[f.j]);
        if a != b {
            seg(a, f.a, f.b);
            seg(b, f.a, f.b);
        }
    }
    for (i, cell) in diagram.cells.iter().enumerate() {
        for k in 0..cell.len() {
            let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
            if on_square_side(a, b) {
                seg(labels[i], a, b);
            }
        }
    }
    for (r, d) in outline.iter().enumerate() {
        if !d.is_empty() {
            let _ = writeln!(
                s,
                r#"<path class="region" data-region="{r}" d="{d}" fill="none" stroke="black" stroke-width="1.2"/>"#
            );
        }
    }
    if let Some(text) = note {
        let _ = writeln!(
            s,
            r#"<text x="6" y="16" font-family="monospace" font-size="12" fill="white">{}</text>"#,
            text.replace('&', "&amp;").replace('<', "&lt;")
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
