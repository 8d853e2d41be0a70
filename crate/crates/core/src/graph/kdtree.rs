//! Static 2-d tree for nearest-neighbor queries with deterministic tie-breaks.
//!
//! Results are ordered by `(squared distance, index)`, so equal distances
//! always resolve to the smaller point index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::Point2;

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point2>,
    /// Point indices laid out as an implicit balanced tree.
    order: Vec<u32>,
}

#[derive(Clone, Copy, PartialEq)]
struct Cand(f64, u32);

impl Eq for Cand {}

impl Ord for Cand {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

impl PartialOrd for Cand {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl KdTree {
    pub fn new(points: &[Point2]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        build(points, &mut order, 0);
        Self {
            points: points.to_vec(),
            order,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Index of the nearest point, smallest index on ties.
    pub fn nearest(&self, q: Point2) -> Option<usize> {
        self.knn(q, 1, None).first().map(|&(i, _)| i)
    }

    /// The `k` nearest points to `q` as `(index, squared distance)`, sorted by
    /// distance then index, optionally skipping one index.
    pub fn knn(&self, q: Point2, k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        let skip = exclude.map(|e| e as u32);
        self.search(q, k, skip, 0, self.order.len(), 0, &mut heap);
        let mut out: Vec<Cand> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.1 as usize, c.0)).collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        q: Point2,
        k: usize,
        skip: Option<u32>,
        lo: usize,
        hi: usize,
        depth: usize,
        heap: &mut BinaryHeap<Cand>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let idx = self.order[mid];
        let p = self.points[idx as usize];
        if Some(idx) != skip {
            let c = Cand(q.dist2(&p), idx);
            if heap.len() < k {
                heap.push(c);
            } else if c < *heap.peek().unwrap() {
                heap.pop();
                heap.push(c);
            }
        }
        let diff = if depth % 2 == 0 { q.x - p.x } else { q.y - p.y };
        let (first, second) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, k, skip, first.0, first.1, depth + 1, heap);
        if heap.len() < k || diff * diff <= heap.peek().unwrap().0 {
            self.search(q, k, skip, second.0, second.1, depth + 1, heap);
        }
    }

    /// All indices within distance `r` of `q` (inclusive), sorted.
    pub fn within(&self, q: Point2, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.range(q, r * r, 0, self.order.len(), 0, &mut out);
        out.sort_unstable();
        out
    }

    fn range(&self, q: Point2, r2: f64, lo: usize, hi: usize, depth: usize, out: &mut Vec<usize>) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let idx = self.order[mid] as usize;
        let p = self.points[idx];
        if q.dist2(&p) <= r2 {
            out.push(idx);
        }
        let diff = if depth % 2 == 0 { q.x - p.x } else { q.y - p.y };
        if diff <= 0.0 || diff * diff <= r2 {
            self.range(q, r2, lo, mid, depth + 1, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.range(q, r2, mid + 1, hi, depth + 1, out);
        }
    }
}

fn build(points: &[Point2], order: &mut [u32], depth: usize) {
    if order.len() <= 1 {
        return;
    }
    let mid = order.len() / 2;
    let key = |i: &u32| {
        let p = points[*i as usize];
        if depth % 2 == 0 {
            p.x
        } else {
            p.y
        }
    };
    order.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
    let (left, right) = order.split_at_mut(mid);
    build(points, left, depth + 1);
    build(points, &mut right[1..], depth + 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Point2> = (0..300)
            .map(|_| Point2::new(rng.random(), rng.random()))
            .collect();
        let tree = KdTree::new(&pts);
        for _ in 0..200 {
            let q = Point2::new(rng.random(), rng.random());
            let mut brute: Vec<(f64, usize)> = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (q.dist2(p), i))
                .collect();
            brute.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let got = tree.knn(q, 7, None);
            let want: Vec<usize> = brute[..7].iter().map(|c| c.1).collect();
            assert_eq!(got.iter().map(|c| c.0).collect::<Vec<_>>(), want);
            let r = 0.1;
            let inside: Vec<usize> = {
                let mut v: Vec<usize> =
                    brute.iter().filter(|c| c.0 <= r * r).map(|c| c.1).collect();
                v.sort_unstable();
                v
            };
            assert_eq!(tree.within(q, r), inside);
        }
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let pts = vec![
            Point2::new(0.75, 0.5),
            Point2::new(0.25, 0.5),
            Point2::new(0.5, 0.75),
        ];
        let tree = KdTree::new(&pts);
        assert_eq!(tree.nearest(Point2::new(0.5, 0.5)), Some(0));
        assert_eq!(tree.knn(Point2::new(0.5, 0.5), 2, Some(0))[0].0, 1);
    }
}
