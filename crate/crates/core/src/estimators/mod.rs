//! Regression estimators built on graph TV denoising, the Haar wavelet
//! baseline, and risk metrics.

mod render;
pub mod wavelet;

pub use render::render_svg;
pub use wavelet::{
    fit_wavelet, fit_wavelet_with, wavelet_threshold, WaveletCoefficient, WaveletFit,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{check_distinct, check_unit_square, voronoi, Point2, VoronoiDiagram};
use crate::graph::{
    build_eps_graph, build_knn_graph, build_voronoi_graph, KdTree, UnionFind, WeightScheme,
    WeightedGraph,
};
use crate::solver::{tv_denoise, SolverOptions, TvFit};

/// Design points with noisy responses `y_i = f0(x_i) + z_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDataset {
    pub points: Vec<Point2>,
    pub y: Vec<f64>,
    /// Noise standard deviation, when known.
    pub sigma: Option<f64>,
    /// `f0` at the design points, when known.
    pub truth: Option<Vec<f64>>,
}

impl RegressionDataset {
    pub fn new(points: Vec<Point2>, y: Vec<f64>) -> Result<Self> {
        check_len(points.len(), y.len())?;
        check_unit_square(&points)?;
        check_distinct(&points)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("responses must be finite".into()));
        }
        Ok(Self {
            points,
            y,
            sigma: None,
            truth: None,
        })
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_truth(mut self, truth: Vec<f64>) -> Result<Self> {
        check_len(self.points.len(), truth.len())?;
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Values on design points extended to the square by nearest-point lookup,
/// i.e. piecewise constant on the Voronoi cells. Equidistant queries take
/// the lowest index; this only affects a null set.
#[derive(Debug, Clone)]
pub struct PiecewiseConstantFn {
    values: Vec<f64>,
    tree: KdTree,
}

impl PiecewiseConstantFn {
    pub fn new(points: &[Point2], values: Vec<f64>) -> Result<Self> {
        check_len(points.len(), values.len())?;
        if points.is_empty() {
            return Err(Error::DegenerateInput("no design points".into()));
        }
        Ok(Self {
            values,
            tree: KdTree::new(points),
        })
    }

    pub fn evaluate(&self, x: Point2) -> f64 {
        let i = self.tree.nearest(x).expect("tree is non-empty");
        self.values[i]
    }

    pub fn points(&self) -> &[Point2] {
        self.tree.points()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `{"points": [[x, y], ...], "values": [...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let pts: Vec<[f64; 2]> = self.points().iter().map(|p| p.to_array()).collect();
        serde_json::json!({ "points": pts, "values": self.values })
    }
}

/// Value of `f` at `x`.
pub fn evaluate(f: &PiecewiseConstantFn, x: Point2) -> f64 {
    f.evaluate(x)
}

/// Connected regions on which the extension of `values` over the Voronoi
/// cells is constant: cells sharing a facet are joined when their values
/// differ by at most `tol`. Returns labels (numbered by lowest member) and
/// the region count.
pub fn region_labels(
    diagram: &VoronoiDiagram,
    values: &[f64],
    tol: f64,
) -> Result<(Vec<usize>, usize)> {
    check_len(diagram.len(), values.len())?;
    let mut uf = UnionFind::new(diagram.len());
    for f in &diagram.facets {
        if (values[f.i] - values[f.j]).abs() <= tol {
            uf.union(f.i, f.j);
        }
    }
    Ok(uf.labels())
}

fn solve(
    graph: &WeightedGraph,
    data: &RegressionDataset,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<(TvFit, PiecewiseConstantFn)> {
    let fit = tv_denoise(graph, &data.y, lambda, opts)?;
    let f = PiecewiseConstantFn::new(&data.points, fit.theta.clone())?;
    Ok((fit, f))
}

/// TV denoising on the Voronoi adjacency graph under `scheme`.
pub fn fit_voronoigram(
    data: &RegressionDataset,
    lambda: f64,
    scheme: WeightScheme,
    opts: &SolverOptions,
) -> Result<(TvFit, PiecewiseConstantFn)> {
    if !scheme.is_voronoi() {
        return Err(Error::InvalidParameter(format!(
            "{scheme:?} is not a Voronoi weighting"
        )));
    }
    let graph = build_voronoi_graph(&voronoi(&data.points)?, scheme)?;
    solve(&graph, data, lambda, opts)
}

/// TV denoising on an eps or kNN graph, extended by nearest-point lookup.
/// Isolated nodes keep their responses.
pub fn fit_graph_tvd(
    data: &RegressionDataset,
    kind: WeightScheme,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<(TvFit, PiecewiseConstantFn)> {
    let graph = match kind {
        WeightScheme::Epsilon { eps } => build_eps_graph(&data.points, eps)?,
        WeightScheme::Knn { k } => build_knn_graph(&data.points, k)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "{other:?} is not an eps or kNN graph"
            )))
        }
    };
    solve(&graph, data, lambda, opts)
}

/// Theory-driven tuning parameter in dimension 2 (natural log):
/// `c sigma tau_n (log n)^(1/2 + alpha)` for Voronoi weights, with
/// `tau_n = n^(1/2)` for clipped (and exact) weights and `1` for unit
/// weights; `c sigma (log n)^(1/2 - alpha)` for eps and kNN graphs.
/// `n` is real so the formula can be evaluated off the integers.
pub fn lambda_theory(scheme: WeightScheme, n: f64, sigma: f64, alpha: f64, c: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must exceed 1, got {alpha}"
        )));
    }
    let log_n = n.ln();
    Ok(match scheme {
        WeightScheme::UnitVoronoi => c * sigma * log_n.powf(0.5 + alpha),
        WeightScheme::ClippedVoronoi { .. } | WeightScheme::ExactVoronoi => {
            c * sigma * n.sqrt() * log_n.powf(0.5 + alpha)
        }
        WeightScheme::Epsilon { .. } | WeightScheme::Knn { .. } => {
            c * sigma * log_n.powf(0.5 - alpha)
        }
    })
}

/// Mean squared error at the design points.
pub fn l2_pn_error(theta: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(truth.len(), theta.len())?;
    if theta.is_empty() {
        return Ok(0.0);
    }
    Ok(theta
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / theta.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `E (f(X) - f0(X))^2` for `X` drawn by `sample`,
/// with a seeded generator.
pub fn l2_p_error<F, T, S>(
    f: F,
    truth: T,
    mut sample: S,
    mc_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate>
where
    F: Fn(Point2) -> f64,
    T: Fn(Point2) -> f64,
    S: FnMut(&mut ChaCha8Rng) -> Point2,
{
    if mc_samples < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 Monte Carlo samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..mc_samples {
        let x = sample(&mut rng);
        let e = f(x) - truth(x);
        sum += e * e;
        sum2 += e * e * e * e;
    }
    let m = mc_samples as f64;
    let mean = sum / m;
    let var = ((sum2 / m - mean * mean) * m / (m - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / m).sqrt(),
        samples: mc_samples,
    })
}
