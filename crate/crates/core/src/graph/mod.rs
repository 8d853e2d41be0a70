//! Weighted undirected graphs over design points, their edge-incidence
//! operator, and the discrete total variation functional.

mod builders;
mod kdtree;
mod textio;

pub(crate) use builders::for_each_eps_pair;
pub use builders::{
    build_eps_graph, build_knn_graph, build_voronoi_graph, knn_radii, WeightScheme,
};
pub use kdtree::KdTree;
pub use textio::{parse_graph, write_graph};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected graph on `0..n` with strictly positive edge weights.
///
/// Edges are stored once with `i < j`, sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Validates and normalizes an edge list.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut out: Vec<Edge> = Vec::new();
        for e in edges {
            if e.i == e.j {
                return Err(Error::InvalidParameter(format!(
                    "self-loop at node {}",
                    e.i
                )));
            }
            if e.i >= n || e.j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) out of range for {n} nodes",
                    e.i, e.j
                )));
            }
            if !(e.w > 0.0 && e.w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.i, e.j, e.w
                )));
            }
            out.push(Edge {
                i: e.i.min(e.j),
                j: e.i.max(e.j),
                w: e.w,
            });
        }
        out.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        if let Some(w) = out
            .windows(2)
            .find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j))
        {
            return Err(Error::InvalidParameter(format!(
                "duplicate edge ({}, {})",
                w[0].i, w[0].j
            )));
        }
        Ok(Self { n, edges: out })
    }

    /// For builders that already produce sorted, valid edges.
    pub(crate) fn from_sorted(n: usize, edges: Vec<Edge>) -> Self {
        debug_assert!(edges
            .windows(2)
            .all(|w| (w[0].i, w[0].j) < (w[1].i, w[1].j)));
        debug_assert!(edges.iter().all(|e| e.i < e.j && e.j < n && e.w > 0.0));
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.i] += 1;
            d[e.j] += 1;
        }
        d
    }

    pub fn mean_weight(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges.iter().map(|e| e.w).sum::<f64>() / self.edges.len() as f64
    }

    pub fn incidence(&self) -> IncidenceOperator<'_> {
        IncidenceOperator { graph: self }
    }

    /// Connected-component labels (numbered by smallest member) and the count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        components_where(self, |_| true)
    }
}

/// Labels the connected components of the subgraph of edges passing `keep`.
/// Labels are dense and ordered by each component's smallest node.
pub(crate) fn components_where<F: Fn(&Edge) -> bool>(
    graph: &WeightedGraph,
    keep: F,
) -> (Vec<usize>, usize) {
    let mut uf = UnionFind::new(graph.n());
    for e in graph.edges().iter().filter(|e| keep(e)) {
        uf.union(e.i, e.j);
    }
    uf.labels()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // smaller root wins so labels do not depend on edge order
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }

    pub(crate) fn labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut label = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut k = 0;
        for i in 0..n {
            let r = self.find(i);
            if label[r] == usize::MAX {
                label[r] = k;
                k += 1;
            }
            out[i] = label[r];
        }
        (out, k)
    }
}

/// The `m x n` edge-incidence operator `D` of a weighted graph: row `l` for
/// edge `(i, j, w)` holds `+w` at `i` and `-w` at `j`. Never materialized.
#[derive(Debug, Clone, Copy)]
pub struct IncidenceOperator<'a> {
    graph: &'a WeightedGraph,
}

impl IncidenceOperator<'_> {
    pub fn rows(&self) -> usize {
        self.graph.m()
    }

    pub fn cols(&self) -> usize {
        self.graph.n()
    }

    /// Nonzeros of row `l` as `[(i, +w), (j, -w)]`.
    pub fn row(&self, l: usize) -> [(usize, f64); 2] {
        let e = self.graph.edges[l];
        [(e.i, e.w), (e.j, -e.w)]
    }

    /// `D x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.graph.edges) {
            *o = e.w * (x[e.i] - x[e.j]);
        }
    }

    /// `D^T s`.
    pub fn apply_transpose(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        self.apply_transpose_into(s, &mut out);
        out
    }

    pub fn apply_transpose_into(&self, s: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (sv, e) in s.iter().zip(&self.graph.edges) {
            out[e.i] += e.w * sv;
            out[e.j] -= e.w * sv;
        }
    }

    /// `D^T D x`, a Laplacian with squared weights.
    pub fn gram_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for e in &self.graph.edges {
            let d = e.w * e.w * (x[e.i] - x[e.j]);
            out[e.i] += d;
            out[e.j] -= d;
        }
    }

    /// Diagonal of `D^T D`.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.cols()];
        for e in &self.graph.edges {
            d[e.i] += e.w * e.w;
            d[e.j] += e.w * e.w;
        }
        d
    }
}

/// `sum_edges w |values_i - values_j|`.
pub fn discrete_tv(graph: &WeightedGraph, values: &[f64]) -> Result<f64> {
    check_len(graph.n(), values.len())?;
    Ok(graph
        .edges
        .iter()
        .map(|e| e.w * (values[e.i] - values[e.j]).abs())
        .sum())
}
