//! Simulation studies: DTV convergence of the truth on geometric graphs,
//! risk versus degrees of freedom along λ grids, and fit rendering, under
//! three design densities.
//!
//! Every task draws from its own ChaCha stream keyed by
//! `(purpose, model, n, repetition)` under the master seed, and results are
//! collected in task order, so outputs do not depend on the thread count.

mod config;
mod sampling;
mod sweep;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{ExperimentConfig, MseEstimator, TvGraph, DEFAULT_C1, DEFAULT_C2};
pub use sampling::{
    annulus_area, ball_box_integral, f0_indicator_ball, noise_sigma, sample_design,
    sample_design_with, simulate_dataset, SamplingModel, ANNULUS_INNER, ANNULUS_OUTER, BALL_RADIUS,
    CENTER,
};
pub use sweep::{
    csv_string, mse_sweep, optimal_risk, reference_value, summarize_mse, summarize_tv,
    tv_estimation_sweep, write_csv, MseRow, MseSummary, TvRow, TvSummary,
};

use crate::asymptotics::{limit_constants, LimitConstants};
use crate::error::Result;
use crate::estimators::{region_labels, render_svg, PiecewiseConstantFn};
use crate::geometry::voronoi;
use crate::graph::{build_knn_graph, build_voronoi_graph, for_each_eps_pair, WeightScheme};
use crate::solver::TvFit;
use sweep::{stream_id, task_rng, Purpose};

/// Graph constants chosen so the average kNN and eps degrees match the
/// average Voronoi degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub n: usize,
    pub repetitions: usize,
    pub voronoi_degree: f64,
    pub k: usize,
    pub knn_degree: f64,
    /// Midpoint of the `c1` interval that yields `k`.
    pub c1: f64,
    pub eps_degree: f64,
    pub c2: f64,
}

/// Calibrates `c1` and `c2` on uniform designs of size `n`.
pub fn calibrate_graph_constants(
    n: usize,
    repetitions: usize,
    seed: u64,
    log_power: f64,
) -> Result<Calibration> {
    let designs: Vec<_> = (0..repetitions)
        .map(|rep| {
            let stream = stream_id(Purpose::Calibration, SamplingModel::Uniform, n, rep);
            sample_design_with(SamplingModel::Uniform, n, &mut task_rng(seed, stream))
        })
        .collect();
    let avg = |per_design: &dyn Fn(&[crate::geometry::Point2]) -> Result<f64>| -> Result<f64> {
        let mut total = 0.0;
        for d in &designs {
            total += per_design(d)?;
        }
        Ok(total / designs.len() as f64)
    };
    let nf = n as f64;
    let voronoi_degree = avg(&|p| {
        Ok(2.0 * build_voronoi_graph(&voronoi(p)?, WeightScheme::ExactVoronoi)?.m() as f64 / nf)
    })?;

    let knn_degree_of = |k: usize| avg(&|p| Ok(2.0 * build_knn_graph(p, k)?.m() as f64 / nf));
    let (mut k, mut knn_degree) = (1, knn_degree_of(1)?);
    while k + 1 < n {
        let next = knn_degree_of(k + 1)?;
        if (next - voronoi_degree).abs() >= (knn_degree - voronoi_degree).abs() {
            break;
        }
        k += 1;
        knn_degree = next;
    }

    let log_factor = nf.ln().powf(log_power);
    let eps_of = |c2: f64| c2 * (log_factor / nf).sqrt();
    let eps_degree_of = |c2: f64| {
        avg(&|p| {
            let mut pairs = 0usize;
            for_each_eps_pair(p, eps_of(c2), |_, _| pairs += 1);
            Ok(2.0 * pairs as f64 / nf)
        })
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while eps_degree_of(hi)? < voronoi_degree {
        hi *= 2.0;
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if eps_degree_of(mid)? < voronoi_degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c2 = 0.5 * (lo + hi);
    Ok(Calibration {
        n,
        repetitions,
        voronoi_degree,
        k,
        knn_degree,
        c1: (k as f64 + 0.5) / log_factor,
        eps_degree: eps_degree_of(c2)?,
        c2,
    })
}

/// Counts reported by [`render_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderSummary {
    /// Constant regions of the nearest-point extension.
    pub regions: usize,
    /// Fused components of the fit on its own graph.
    pub components: usize,
}

/// Draws the nearest-point extension of `fit` as SVG, outlining each
/// constant region. When the fit came from a non-Voronoi graph the region
/// count can exceed the component count; the figure says so.
pub fn render_fit(f: &PiecewiseConstantFn, fit: &TvFit, path: &Path) -> Result<RenderSummary> {
    let diagram = voronoi(f.points())?;
    let (labels, regions) = region_labels(&diagram, f.values(), fit.fuse_tol)?;
    let summary = RenderSummary {
        regions,
        components: fit.n_components,
    };
    let mut note = format!(
        "lambda = {:.4}, K = {}, regions = {}",
        fit.lambda, fit.n_components, regions
    );
    if regions != fit.n_components {
        note.push_str(" (extension regions differ from graph components)");
    }
    let svg = render_svg(&diagram, f.values(), &labels, 600.0, Some(&note))?;
    std::fs::write(path, svg)?;
    Ok(summary)
}

/// Hex SHA-256 of `bytes` behind a git-style `blob <len>\0` header.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub model: SamplingModel,
    pub graph: TvGraph,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: usize,
    pub hash: String,
}

/// Everything needed to regenerate a run: the full config with defaults
/// filled in, the limit constants, and hashes of config and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub constants: LimitConstants,
    pub references: Vec<ReferenceLine>,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Result<Self> {
        let config_json = serde_json::to_vec(config)?;
        let mut references = Vec::new();
        for &model in &config.models {
            for &graph in &config.tv_graphs {
                references.push(ReferenceLine {
                    model,
                    graph,
                    value: reference_value(model, graph)?,
                });
            }
        }
        Ok(Self {
            tool: "voronoigram".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
            config_hash: content_hash(&config_json),
            constants: limit_constants(2)?,
            references,
            outputs: Vec::new(),
        })
    }

    pub fn add_output(&mut self, path: &str, bytes: &[u8]) {
        self.outputs.push(OutputRecord {
            path: path.into(),
            bytes: bytes.len(),
            hash: content_hash(bytes),
        });
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
