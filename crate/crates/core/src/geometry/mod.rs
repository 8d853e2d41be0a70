//! Planar geometry: exact-predicate Delaunay triangulation and Voronoi
//! diagrams clipped to the unit square.

mod delaunay;
mod predicates;
mod voronoi;

pub use delaunay::{delaunay, Triangulation};
pub use voronoi::{cell_area, facet_length, voronoi, Facet, VoronoiDiagram};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A design point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(&self, other: &Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

/// Checks that every point lies strictly inside the open unit square.
pub fn check_unit_square(points: &[Point2]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        let inside = |v: f64| v > 0.0 && v < 1.0;
        if !(inside(p.x) && inside(p.y)) {
            return Err(Error::InvalidParameter(format!(
                "point {i} = ({}, {}) is not inside the open unit square",
                p.x, p.y
            )));
        }
    }
    Ok(())
}

/// Checks that no two points coincide.
pub fn check_distinct(points: &[Point2]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(Error::DegenerateInput(format!(
                "points {} and {} coincide",
                w[0].min(w[1]),
                w[0].max(w[1])
            )));
        }
    }
    Ok(())
}

/// Shoelace area of a polygon given as a vertex loop (positive when counterclockwise).
pub fn polygon_signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Even-odd containment for a convex counterclockwise polygon; boundary counts as inside.
pub fn convex_contains(poly: &[Point2], q: Point2, tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let cross = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
        cross >= -tol
    })
}
