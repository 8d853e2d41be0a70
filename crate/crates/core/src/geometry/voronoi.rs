//! Voronoi cells clipped to the closed unit square.
//!
//! Each cell is the square cut by the bisector half-planes of the point's
//! Delaunay neighbors, which is exactly the Voronoi cell intersected with the
//! square. Polygon edges remember which half-plane produced them, so the facet
//! shared by cells `i` and `j` is read off as the edge of cell `i` tagged `j`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{delaunay, polygon_signed_area, Point2};
use crate::error::{Error, Result};

/// Vertices closer than this are merged during clipping.
const MERGE_TOL: f64 = 1e-13;
/// Facets shorter than this are contact points, not facets.
pub(crate) const FACET_MIN_LEN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeTag {
    Boundary,
    Neighbor(u32),
}

/// Shared boundary segment between cells `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub i: usize,
    pub j: usize,
    pub a: Point2,
    pub b: Point2,
}

impl Facet {
    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }
}

/// Voronoi diagram of a point set restricted to `[0, 1]^2`.
#[derive(Debug, Clone)]
pub struct VoronoiDiagram {
    pub points: Vec<Point2>,
    /// Counterclockwise vertex loops.
    pub cells: Vec<Vec<Point2>>,
    /// Sorted by `(i, j)`.
    pub facets: Vec<Facet>,
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    points: Vec<[f64; 2]>,
    cells: Vec<Vec<[f64; 2]>>,
    facets: Vec<(usize, usize, f64)>,
}

impl VoronoiDiagram {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index into `facets` for the unordered pair `{i, j}`.
    pub fn facet_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.facets.binary_search_by(|f| (f.i, f.j).cmp(&key)).ok()
    }

    /// Geometric perimeter functional `sum_facets len * |v_i - v_j|` of the
    /// piecewise-constant function with value `values[i]` on cell `i`.
    pub fn jump_length(&self, values: &[f64]) -> Result<f64> {
        crate::error::check_len(self.len(), values.len())?;
        Ok(self
            .facets
            .iter()
            .map(|f| f.length() * (values[f.i] - values[f.j]).abs())
            .sum())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = DiagramJson {
            points: self.points.iter().map(|p| p.to_array()).collect(),
            cells: self
                .cells
                .iter()
                .map(|c| c.iter().map(|p| p.to_array()).collect())
                .collect(),
            facets: self.facets.iter().map(|f| (f.i, f.j, f.length())).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// SVG drawing of the cell outlines and design points, `size` pixels square.
    pub fn to_svg(&self, size: f64) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
        );
        let _ = writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
        for cell in &self.cells {
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="none" stroke="black" stroke-width="0.5"/>"#,
                svg_points(cell, size)
            );
        }
        for p in &self.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.3}" cy="{:.3}" r="1.5" fill="steelblue"/>"#,
                p.x * size,
                (1.0 - p.y) * size
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }
}

pub(crate) fn svg_points(poly: &[Point2], size: f64) -> String {
    let mut out = String::new();
    for (k, p) in poly.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.3},{:.3}", p.x * size, (1.0 - p.y) * size);
    }
    out
}

/// Builds the Voronoi diagram of `points` clipped to the unit square.
pub fn voronoi(points: &[Point2]) -> Result<VoronoiDiagram> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "Voronoi diagram needs at least 2 points, got {n}"
        )));
    }
    let neighbors = delaunay_neighbors(points)?;

    let mut cells = Vec::with_capacity(n);
    let mut facets = Vec::with_capacity(3 * n);
    let mut scratch = Vec::with_capacity(16);
    for i in 0..n {
        let poly = clip_cell(points, i, &neighbors[i], &mut scratch);
        let m = poly.len();
        for k in 0..m {
            if let EdgeTag::Neighbor(j) = poly[k].1 {
                let j = j as usize;
                if j > i {
                    let a = poly[k].0;
                    let b = poly[(k + 1) % m].0;
                    if a.dist(&b) > FACET_MIN_LEN {
                        facets.push(Facet { i, j, a, b });
                    }
                }
            }
        }
        cells.push(poly.into_iter().map(|(p, _)| p).collect());
    }
    facets.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
    Ok(VoronoiDiagram {
        points: points.to_vec(),
        cells,
        facets,
    })
}

fn delaunay_neighbors(points: &[Point2]) -> Result<Vec<Vec<usize>>> {
    match delaunay(points) {
        Ok(tr) => Ok(tr.vertex_neighbors()),
        Err(Error::DegenerateInput(msg)) if msg.contains("collinear") || points.len() < 3 => {
            // Collinear sites: sort along the line, consecutive sites are the only neighbors.
            super::check_distinct(points)?;
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&a, &b| {
                points[a]
                    .x
                    .total_cmp(&points[b].x)
                    .then(points[a].y.total_cmp(&points[b].y))
            });
            let mut nbrs = vec![Vec::new(); points.len()];
            for w in order.windows(2) {
                nbrs[w[0]].push(w[1]);
                nbrs[w[1]].push(w[0]);
            }
            Ok(nbrs)
        }
        Err(e) => Err(e),
    }
}

fn clip_cell(
    points: &[Point2],
    i: usize,
    neighbors: &[usize],
    scratch: &mut Vec<(Point2, EdgeTag)>,
) -> Vec<(Point2, EdgeTag)> {
    let mut poly = vec![
        (Point2::new(0.0, 0.0), EdgeTag::Boundary),
        (Point2::new(1.0, 0.0), EdgeTag::Boundary),
        (Point2::new(1.0, 1.0), EdgeTag::Boundary),
        (Point2::new(0.0, 1.0), EdgeTag::Boundary),
    ];
    let xi = points[i];
    for &j in neighbors {
        let xj = points[j];
        let nx = xj.x - xi.x;
        let ny = xj.y - xi.y;
        let norm = (nx * nx + ny * ny).sqrt();
        let (nx, ny) = (nx / norm, ny / norm);
        let mx = 0.5 * (xi.x + xj.x);
        let my = 0.5 * (xi.y + xj.y);
        let side = |p: Point2| (p.x - mx) * nx + (p.y - my) * ny;
        clip_halfplane(&poly, side, EdgeTag::Neighbor(j as u32), scratch);
        std::mem::swap(&mut poly, scratch);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

/// Keeps the part of a convex polygon where `side(p) <= 0`.
fn clip_halfplane<F: Fn(Point2) -> f64>(
    poly: &[(Point2, EdgeTag)],
    side: F,
    tag: EdgeTag,
    out: &mut Vec<(Point2, EdgeTag)>,
) {
    out.clear();
    let m = poly.len();
    let s: Vec<f64> = poly.iter().map(|&(p, _)| side(p)).collect();
    let inside = |v: f64| v <= MERGE_TOL;
    if s.iter().all(|&v| inside(v)) {
        out.extend_from_slice(poly);
        return;
    }
    for k in 0..m {
        let (p, t) = poly[k];
        let (q, _) = poly[(k + 1) % m];
        let (sp, sq) = (s[k], s[(k + 1) % m]);
        match (inside(sp), inside(sq)) {
            (true, true) => out.push((p, t)),
            (true, false) => {
                out.push((p, t));
                out.push((crossing(p, q, sp, sq), tag));
            }
            (false, true) => out.push((crossing(p, q, sp, sq), t)),
            (false, false) => {}
        }
    }
    // Drop zero-length edges; the surviving vertex keeps the outgoing edge's tag.
    let mut k = 0;
    while out.len() > 1 && k < out.len() {
        let next = (k + 1) % out.len();
        if out[k].0.dist(&out[next].0) <= MERGE_TOL {
            out.remove(k);
        } else {
            k += 1;
        }
    }
    if out.len() < 3 {
        out.clear();
    }
}

#[inline]
fn crossing(p: Point2, q: Point2, sp: f64, sq: f64) -> Point2 {
    let t = sp / (sp - sq);
    Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// Length of the facet shared by cells `i` and `j`, zero if they only touch or
/// are not adjacent.
pub fn facet_length(diagram: &VoronoiDiagram, i: usize, j: usize) -> f64 {
    diagram
        .facet_index(i, j)
        .map(|k| diagram.facets[k].length())
        .unwrap_or(0.0)
}

/// Area of cell `i`.
pub fn cell_area(diagram: &VoronoiDiagram, i: usize) -> f64 {
    polygon_signed_area(&diagram.cells[i])
}
