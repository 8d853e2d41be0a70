//! Incremental Bowyer–Watson triangulation.
//!
//! The convex hull is closed off with "ghost" triangles that share a symbolic
//! vertex at infinity, so points outside the current hull are inserted with
//! the same cavity-and-fan step as interior points. All geometric decisions go
//! through exact orientation and in-circle predicates. A point lying exactly on
//! a circumcircle is not in conflict with that triangle, so cocircular ties
//! keep whichever diagonal the earlier insertions produced; the insertion order
//! is a Hilbert-curve ordering with index tie-breaks, which makes the output a
//! pure function of the input sequence.

use serde::Serialize;

use super::predicates::{in_circle, orient, strictly_between};
use super::{check_distinct, Point2};
use crate::error::{Error, Result};

const GHOST: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [u32; 3],
    /// `n[k]` is the triangle across the edge opposite `v[k]`.
    n: [u32; 3],
}

impl Tri {
    #[inline]
    fn is_ghost(&self) -> bool {
        self.v.contains(&GHOST)
    }
}

/// A Delaunay triangulation of a planar point set.
#[derive(Debug, Clone, Serialize)]
pub struct Triangulation {
    pub vertices: Vec<Point2>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// `adjacency[t][k]` is the triangle across the edge opposite vertex `k`
    /// of triangle `t`, or `None` on the convex hull.
    pub adjacency: Vec<[Option<usize>; 3]>,
}

impl Triangulation {
    /// Number of vertices on the convex hull.
    pub fn hull_size(&self) -> usize {
        // each hull edge is a missing neighbor; hull edges == hull vertices
        self.adjacency
            .iter()
            .map(|a| a.iter().filter(|n| n.is_none()).count())
            .sum()
    }

    /// Sorted, deduplicated neighbor lists of every vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::with_capacity(6); self.vertices.len()];
        for t in &self.triangles {
            for k in 0..3 {
                let a = t[k];
                let b = t[(k + 1) % 3];
                nbrs[a].push(b);
                nbrs[b].push(a);
            }
        }
        for l in &mut nbrs {
            l.sort_unstable();
            l.dedup();
        }
        nbrs
    }

    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(3 * self.triangles.len());
        for t in &self.triangles {
            for k in 0..3 {
                let a = t[k];
                let b = t[(k + 1) % 3];
                out.push((a.min(b), a.max(b)));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Delaunay triangulation of `points`.
///
/// Fails with `DegenerateInput` when there are fewer than three points, when
/// two points coincide, or when all points are collinear.
pub fn delaunay(points: &[Point2]) -> Result<Triangulation> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "triangulation needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.len() > (u32::MAX - 1) as usize {
        return Err(Error::InvalidParameter("too many points".into()));
    }
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::InvalidParameter("non-finite coordinate".into()));
    }
    check_distinct(points)?;

    let order = insertion_order(points)?;
    let mut b = Builder::new(points, &order);
    for &i in &order[3..] {
        b.insert(i);
    }
    Ok(b.finish())
}

/// Hilbert order, with the first three entries forming a non-degenerate triangle.
fn insertion_order(points: &[Point2]) -> Result<Vec<u32>> {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in points {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let scale = 65535.0 / span;
    let mut keyed: Vec<(u64, u32)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let hx = ((p.x - x0) * scale) as u32;
            let hy = ((p.y - y0) * scale) as u32;
            (hilbert_index(16, hx, hy), i as u32)
        })
        .collect();
    keyed.sort_unstable();
    let mut order: Vec<u32> = keyed.into_iter().map(|(_, i)| i).collect();

    let a = points[order[0] as usize];
    let b = points[order[1] as usize];
    let third = (2..order.len())
        .find(|&k| orient(a, b, points[order[k] as usize]) != 0.0)
        .ok_or_else(|| Error::DegenerateInput("all points are collinear".into()))?;
    let c = order.remove(third);
    order.insert(2, c);
    Ok(order)
}

fn hilbert_index(bits: u32, mut x: u32, mut y: u32) -> u64 {
    let mut d: u64 = 0;
    let mut s: u32 = 1 << (bits - 1);
    while s > 0 {
        let rx = u32::from((x & s) > 0);
        let ry = u32::from((y & s) > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = s.wrapping_mul(2).wrapping_sub(1).wrapping_sub(x) & ((1 << bits) - 1);
                y = s.wrapping_mul(2).wrapping_sub(1).wrapping_sub(y) & ((1 << bits) - 1);
            }
            std::mem::swap(&mut x, &mut y);
        }
        s >>= 1;
    }
    d
}

struct Builder<'a> {
    pts: &'a [Point2],
    tris: Vec<Tri>,
    mark: Vec<u32>,
    epoch: u32,
    last: u32,
    stack: Vec<u32>,
    cavity: Vec<u32>,
    /// (a, b, outside triangle) for every cavity boundary edge `a -> b`.
    boundary: Vec<(u32, u32, u32)>,
    fan: Vec<(u32, u32, u32)>,
}

impl<'a> Builder<'a> {
    fn new(pts: &'a [Point2], order: &[u32]) -> Self {
        let (i0, mut i1, mut i2) = (order[0], order[1], order[2]);
        if orient(pts[i0 as usize], pts[i1 as usize], pts[i2 as usize]) < 0.0 {
            std::mem::swap(&mut i1, &mut i2);
        }
        let v = [i0, i1, i2];
        let mut tris = Vec::with_capacity(2 * pts.len() + 8);
        tris.push(Tri { v, n: [1, 2, 3] });
        let mut fan = Vec::with_capacity(3);
        for k in 0..3 {
            let u = v[(k + 1) % 3];
            let w = v[(k + 2) % 3];
            tris.push(Tri {
                v: [w, u, GHOST],
                n: [GHOST, GHOST, 0],
            });
            fan.push((w, u, 1 + k as u32));
        }
        let mut b = Self {
            pts,
            tris,
            mark: vec![0; 4],
            epoch: 0,
            last: 0,
            stack: Vec::new(),
            cavity: Vec::new(),
            boundary: Vec::new(),
            fan,
        };
        b.link_fan();
        b
    }

    #[inline]
    fn p(&self, i: u32) -> Point2 {
        self.pts[i as usize]
    }

    fn in_conflict(&self, t: u32, q: Point2) -> bool {
        let [a, b, c] = self.tris[t as usize].v;
        let (u, w) = if a == GHOST {
            (b, c)
        } else if b == GHOST {
            (c, a)
        } else if c == GHOST {
            (a, b)
        } else {
            return in_circle(self.p(a), self.p(b), self.p(c), q) > 0.0;
        };
        // the outside of the hull edge is to the left of u -> w
        let o = orient(self.p(u), self.p(w), q);
        if o != 0.0 {
            o > 0.0
        } else {
            strictly_between(self.p(u), self.p(w), q)
        }
    }

    fn locate(&self, q: Point2) -> u32 {
        let mut t = self.last;
        let tri = self.tris[t as usize];
        if tri.is_ghost() {
            let k = tri.v.iter().position(|&v| v == GHOST).unwrap();
            t = tri.n[k];
        }
        let limit = 4 * self.tris.len() + 16;
        for step in 0..limit {
            let tri = self.tris[t as usize];
            if tri.is_ghost() {
                return t;
            }
            let rot = step % 3;
            let mut next = None;
            for j in 0..3 {
                let k = (j + rot) % 3;
                let a = tri.v[(k + 1) % 3];
                let b = tri.v[(k + 2) % 3];
                if orient(self.p(a), self.p(b), q) < 0.0 {
                    next = Some(tri.n[k]);
                    break;
                }
            }
            match next {
                Some(nb) => t = nb,
                None => return t,
            }
        }
        // Visibility walks terminate on Delaunay triangulations; this is only a guard.
        (0..self.tris.len() as u32)
            .find(|&t| self.in_conflict(t, q))
            .expect("some triangle conflicts with every new point")
    }

    fn insert(&mut self, i: u32) {
        let q = self.p(i);
        let t0 = self.locate(q);
        debug_assert!(self.in_conflict(t0, q));

        self.epoch += 1;
        let inside = 2 * self.epoch;
        let outside = inside + 1;
        self.cavity.clear();
        self.boundary.clear();
        self.stack.clear();
        self.stack.push(t0);
        self.mark[t0 as usize] = inside;
        while let Some(t) = self.stack.pop() {
            self.cavity.push(t);
            let tri = self.tris[t as usize];
            for k in 0..3 {
                let nb = tri.n[k];
                let m = self.mark[nb as usize];
                if m == inside {
                    continue;
                }
                if m != outside && self.in_conflict(nb, q) {
                    self.mark[nb as usize] = inside;
                    self.stack.push(nb);
                } else {
                    self.mark[nb as usize] = outside;
                    self.boundary
                        .push((tri.v[(k + 1) % 3], tri.v[(k + 2) % 3], nb));
                }
            }
        }

        self.fan.clear();
        for idx in 0..self.boundary.len() {
            let (a, b, nb) = self.boundary[idx];
            let slot = if idx < self.cavity.len() {
                self.cavity[idx]
            } else {
                self.tris.push(Tri {
                    v: [0; 3],
                    n: [0; 3],
                });
                self.mark.push(0);
                (self.tris.len() - 1) as u32
            };
            self.tris[slot as usize] = Tri {
                v: [a, b, i],
                n: [GHOST, GHOST, nb],
            };
            let back = self.tris[nb as usize]
                .v
                .iter()
                .position(|&v| v != a && v != b)
                .expect("outside triangle shares the edge");
            self.tris[nb as usize].n[back] = slot;
            self.fan.push((a, b, slot));
        }
        debug_assert_eq!(self.boundary.len(), self.cavity.len() + 2);
        self.link_fan();
        self.last = self
            .fan
            .iter()
            .map(|f| f.2)
            .find(|&s| !self.tris[s as usize].is_ghost())
            .unwrap_or(self.fan[0].2);
    }

    /// Links the triangles `(a, b, apex)` of a closed fan around a common apex.
    fn link_fan(&mut self) {
        let mut by_first: Vec<(u32, u32)> = self.fan.iter().map(|&(a, _, s)| (a, s)).collect();
        let mut by_second: Vec<(u32, u32)> = self.fan.iter().map(|&(_, b, s)| (b, s)).collect();
        by_first.sort_unstable();
        by_second.sort_unstable();
        let find = |list: &[(u32, u32)], key: u32| -> u32 {
            let k = list.partition_point(|e| e.0 < key);
            debug_assert_eq!(list[k].0, key);
            list[k].1
        };
        for &(a, b, s) in &self.fan {
            // opposite a: edge (b, apex), owned by the fan triangle starting at b
            self.tris[s as usize].n[0] = find(&by_first, b);
            // opposite b: edge (apex, a), owned by the fan triangle ending at a
            self.tris[s as usize].n[1] = find(&by_second, a);
        }
    }

    fn finish(self) -> Triangulation {
        let mut remap = vec![usize::MAX; self.tris.len()];
        let mut triangles = Vec::new();
        for (t, tri) in self.tris.iter().enumerate() {
            if !tri.is_ghost() {
                remap[t] = triangles.len();
                triangles.push([tri.v[0] as usize, tri.v[1] as usize, tri.v[2] as usize]);
            }
        }
        let adjacency = self
            .tris
            .iter()
            .filter(|t| !t.is_ghost())
            .map(|tri| {
                let mut a = [None; 3];
                for k in 0..3 {
                    let r = remap[tri.n[k] as usize];
                    a[k] = (r != usize::MAX).then_some(r);
                }
                a
            })
            .collect();
        Triangulation {
            vertices: self.pts.to_vec(),
            triangles,
            adjacency,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Point2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Point2::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect()
    }

    fn assert_delaunay(tr: &Triangulation) {
        let p = &tr.vertices;
        for (t, tri) in tr.triangles.iter().enumerate() {
            assert!(
                orient(p[tri[0]], p[tri[1]], p[tri[2]]) > 0.0,
                "triangle {t} not ccw"
            );
            for k in 0..3 {
                if let Some(nb) = tr.adjacency[t][k] {
                    let other = tr.triangles[nb];
                    let opp = *other
                        .iter()
                        .find(|v| !tri.contains(v))
                        .expect("neighbors share an edge");
                    assert!(
                        in_circle(p[tri[0]], p[tri[1]], p[tri[2]], p[opp]) <= 0.0,
                        "edge of triangle {t} is not locally Delaunay"
                    );
                    assert!(tr.adjacency[nb].contains(&Some(t)));
                }
            }
        }
    }

    #[test]
    fn three_points_single_triangle() {
        let pts = [
            Point2::new(0.1, 0.1),
            Point2::new(0.9, 0.2),
            Point2::new(0.4, 0.8),
        ];
        let tr = delaunay(&pts).unwrap();
        assert_eq!(tr.triangles.len(), 1);
        assert_eq!(tr.hull_size(), 3);
    }

    #[test]
    fn square_gives_two_triangles_sharing_a_diagonal() {
        let pts = [
            Point2::new(0.25, 0.25),
            Point2::new(0.75, 0.25),
            Point2::new(0.25, 0.75),
            Point2::new(0.75, 0.75),
        ];
        let tr = delaunay(&pts).unwrap();
        assert_eq!(tr.triangles.len(), 2);
        let shared = tr.triangles[0]
            .iter()
            .filter(|v| tr.triangles[1].contains(v))
            .count();
        assert_eq!(shared, 2);
        assert_eq!(tr.edges().len(), 5);
        // same input, same diagonal
        assert_eq!(tr.triangles, delaunay(&pts).unwrap().triangles);
    }

    #[test]
    fn euler_count_on_uniform_cloud() {
        let pts = random_points(1000, 7);
        let tr = delaunay(&pts).unwrap();
        let h = tr.hull_size();
        assert_eq!(tr.triangles.len(), 2 * pts.len() - 2 - h);
        assert_delaunay(&tr);
    }

    #[test]
    fn lattice_with_many_cocircular_ties() {
        let mut pts = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                pts.push(Point2::new(
                    (i as f64 + 0.5) / 20.0,
                    (j as f64 + 0.5) / 20.0,
                ));
            }
        }
        let tr = delaunay(&pts).unwrap();
        assert_eq!(tr.triangles.len(), 2 * 400 - 2 - 76);
        assert_delaunay(&tr);
    }

    #[test]
    fn collinear_points_on_hull() {
        let mut pts: Vec<Point2> = (1..10).map(|i| Point2::new(i as f64 / 10.0, 0.1)).collect();
        pts.push(Point2::new(0.5, 0.9));
        pts.extend((1..10).map(|i| Point2::new(i as f64 / 10.0, 0.5)));
        let tr = delaunay(&pts).unwrap();
        let h = 9 + 1 + 2; // bottom row, apex, two row-end points at y = 0.5
        assert_eq!(tr.hull_size(), h);
        assert_eq!(tr.triangles.len(), 2 * pts.len() - 2 - h);
        assert_delaunay(&tr);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(
            delaunay(&[Point2::new(0.1, 0.1), Point2::new(0.2, 0.2)]),
            Err(Error::DegenerateInput(_))
        ));
        let line: Vec<_> = (1..6)
            .map(|i| Point2::new(0.1 * i as f64, 0.1 * i as f64))
            .collect();
        assert!(matches!(delaunay(&line), Err(Error::DegenerateInput(_))));
        let dup = [
            Point2::new(0.1, 0.1),
            Point2::new(0.5, 0.9),
            Point2::new(0.1, 0.1),
        ];
        assert!(matches!(delaunay(&dup), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn deterministic() {
        let pts = random_points(500, 3);
        let a = delaunay(&pts).unwrap();
        let b = delaunay(&pts).unwrap();
        assert_eq!(a.triangles, b.triangles);
    }
}
