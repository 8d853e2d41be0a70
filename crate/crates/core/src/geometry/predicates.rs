//! Thin wrappers over adaptive-precision orientation and in-circle tests.

use robust::Coord;

use super::Point2;

#[inline]
fn c(p: Point2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Positive when `a, b, q` turn counterclockwise, zero when collinear.
#[inline]
pub(crate) fn orient(a: Point2, b: Point2, q: Point2) -> f64 {
    robust::orient2d(c(a), c(b), c(q))
}

/// Positive when `q` lies strictly inside the circle through the
/// counterclockwise triangle `a, b, c`.
#[inline]
pub(crate) fn in_circle(a: Point2, b: Point2, cc: Point2, q: Point2) -> f64 {
    robust::incircle(c(a), c(b), c(cc), c(q))
}

/// For `q` collinear with `a` and `b`: whether it lies strictly between them.
#[inline]
pub(crate) fn strictly_between(a: Point2, b: Point2, q: Point2) -> bool {
    if a.x != b.x {
        (a.x < q.x && q.x < b.x) || (b.x < q.x && q.x < a.x)
    } else {
        (a.y < q.y && q.y < b.y) || (b.y < q.y && q.y < a.y)
    }
}
