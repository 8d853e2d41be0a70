use serde::{Deserialize, Serialize};

use super::{Edge, KdTree, WeightedGraph};
use crate::error::{Error, Result};
use crate::geometry::{Point2, VoronoiDiagram};

/// Edge-weighting schemes for the geometric graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    /// Facet lengths.
    ExactVoronoi,
    /// Facet lengths floored at `c0 * n^{-(d-1)/d}`.
    ClippedVoronoi { c0: f64 },
    /// Unit weight on every Voronoi adjacency.
    UnitVoronoi,
    /// Unit weight for pairs within distance `eps`.
    Epsilon { eps: f64 },
    /// Unit weight when either point is among the other's `k` nearest.
    Knn { k: usize },
}

impl WeightScheme {
    pub fn is_voronoi(&self) -> bool {
        matches!(
            self,
            Self::ExactVoronoi | Self::ClippedVoronoi { .. } | Self::UnitVoronoi
        )
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Self::ClippedVoronoi { c0 } if !(c0 > 0.0 && c0.is_finite()) => Err(
                Error::InvalidParameter(format!("clipping constant must be positive, got {c0}")),
            ),
            Self::Epsilon { eps } if !(eps >= 0.0 && eps.is_finite()) => Err(
                Error::InvalidParameter(format!("eps must be non-negative, got {eps}")),
            ),
            Self::Knn { k } if k == 0 || k >= n => Err(Error::InvalidParameter(format!(
                "k must satisfy 1 <= k < n = {n}, got {k}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Voronoi adjacency graph: one edge per facet of positive length.
pub fn build_voronoi_graph(
    diagram: &VoronoiDiagram,
    scheme: WeightScheme,
) -> Result<WeightedGraph> {
    let n = diagram.len();
    scheme.validate(n)?;
    let weight: Box<dyn Fn(f64) -> f64> = match scheme {
        WeightScheme::ExactVoronoi => Box::new(|len| len),
        WeightScheme::ClippedVoronoi { c0 } => {
            // d = 2: floor c0 * n^{-1/2}
            let floor = c0 / (n as f64).sqrt();
            Box::new(move |len: f64| len.max(floor))
        }
        WeightScheme::UnitVoronoi => Box::new(|_| 1.0),
        other => {
            return Err(Error::InvalidParameter(format!(
                "{other:?} is not a Voronoi weighting"
            )))
        }
    };
    let edges = diagram
        .facets
        .iter()
        .map(|f| Edge {
            i: f.i,
            j: f.j,
            w: weight(f.length()),
        })
        .collect();
    Ok(WeightedGraph::from_sorted(n, edges))
}

/// Unit-weight graph joining every pair at distance `<= eps`.
///
/// Uses a uniform bucket grid with cells no smaller than `eps`, so only the
/// 3x3 block around each bucket is scanned. `eps = 0` yields the empty graph
/// for distinct points.
pub fn build_eps_graph(points: &[Point2], eps: f64) -> Result<WeightedGraph> {
    let n = points.len();
    WeightScheme::Epsilon { eps }.validate(n)?;
    let mut edges = Vec::new();
    for_each_eps_pair(points, eps, |i, j| edges.push(Edge { i, j, w: 1.0 }));
    edges.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
    Ok(WeightedGraph::from_sorted(n, edges))
}

/// Calls `f(i, j)` with `i < j` for every pair within distance `eps`.
pub(crate) fn for_each_eps_pair<F: FnMut(usize, usize)>(points: &[Point2], eps: f64, mut f: F) {
    let n = points.len();
    if n < 2 || eps <= 0.0 {
        return;
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in points {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let per_side = ((span / eps).floor() as usize)
        .min((n as f64).sqrt().ceil() as usize * 2)
        .max(1);
    let cell = span / per_side as f64;
    let bucket_of = |p: &Point2| {
        let bx = (((p.x - x0) / cell) as usize).min(per_side - 1);
        let by = (((p.y - y0) / cell) as usize).min(per_side - 1);
        (bx, by)
    };
    // counting sort of points into buckets
    let mut start = vec![0usize; per_side * per_side + 1];
    for p in points {
        let (bx, by) = bucket_of(p);
        start[by * per_side + bx + 1] += 1;
    }
    for k in 0..per_side * per_side {
        start[k + 1] += start[k];
    }
    let mut fill = start.clone();
    let mut members = vec![0usize; n];
    for (i, p) in points.iter().enumerate() {
        let (bx, by) = bucket_of(p);
        let b = by * per_side + bx;
        members[fill[b]] = i;
        fill[b] += 1;
    }
    let eps2 = eps * eps;
    for (i, p) in points.iter().enumerate() {
        let (bx, by) = bucket_of(p);
        for ny in by.saturating_sub(1)..=(by + 1).min(per_side - 1) {
            for nx in bx.saturating_sub(1)..=(bx + 1).min(per_side - 1) {
                let b = ny * per_side + nx;
                for &j in &members[start[b]..start[b + 1]] {
                    if j > i && p.dist2(&points[j]) <= eps2 {
                        f(i, j);
                    }
                }
            }
        }
    }
}

/// Distance from each point to its `k`-th nearest other point.
pub fn knn_radii(points: &[Point2], k: usize) -> Result<Vec<f64>> {
    WeightScheme::Knn { k }.validate(points.len())?;
    let tree = KdTree::new(points);
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, p)| tree.knn(*p, k, Some(i))[k - 1].1.sqrt())
        .collect())
}

/// Symmetrized kNN graph: `{i, j}` is an edge when `j` is among the `k`
/// nearest neighbors of `i` or vice versa. Equal distances are ranked by
/// point index.
pub fn build_knn_graph(points: &[Point2], k: usize) -> Result<WeightedGraph> {
    let n = points.len();
    WeightScheme::Knn { k }.validate(n)?;
    let tree = KdTree::new(points);
    let mut pairs = Vec::with_capacity(n * k);
    for (i, p) in points.iter().enumerate() {
        for (j, _) in tree.knn(*p, k, Some(i)) {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let edges = pairs
        .into_iter()
        .map(|(i, j)| Edge { i, j, w: 1.0 })
        .collect();
    Ok(WeightedGraph::from_sorted(n, edges))
}
