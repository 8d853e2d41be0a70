use std::collections::HashMap;
use std::hash::Hash;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    f0_indicator_ball, noise_sigma, sample_design_with, ExperimentConfig, MseEstimator,
    SamplingModel, TvGraph,
};
use crate::asymptotics::{limit_prediction, LimitGraph};
use crate::error::Result;
use crate::geometry::{voronoi, Point2, VoronoiDiagram};
use crate::graph::{
    build_eps_graph, build_knn_graph, build_voronoi_graph, discrete_tv, for_each_eps_pair, KdTree,
    WeightScheme, WeightedGraph,
};
use crate::solver::tv_denoise_path;

/// Top bits of a stream id: which kind of randomness it feeds.
#[derive(Clone, Copy)]
pub(crate) enum Purpose {
    TvDesign = 1,
    MseData = 2,
    MonteCarlo = 3,
    Calibration = 4,
}

/// Counter-based stream id for one `(purpose, model, n, rep)` task, so a
/// task's draws do not depend on which other tasks run or in what order.
pub(crate) fn stream_id(purpose: Purpose, model: SamplingModel, n: usize, rep: usize) -> u64 {
    let code = SamplingModel::ALL
        .iter()
        .position(|&m| m == model)
        .unwrap_or(0) as u64;
    ((purpose as u64) << 60)
        | (code << 56)
        | ((n as u64 & 0xFFFF_FFFF) << 24)
        | (rep as u64 & 0xFF_FFFF)
}

pub(crate) fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One DTV measurement of the truth on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub model: SamplingModel,
    pub graph: TvGraph,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub stream: u64,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub dtv: f64,
    /// `dtv` for Voronoi; `dtv / (n^2 eps^3)` for eps; `dtv / (n^2 eps_bar^3)`
    /// with `eps_bar = (k/n)^(1/2)` for kNN.
    pub rescaled_dtv: f64,
    /// Predicted limit of `rescaled_dtv`; empty for kNN.
    pub reference: Option<f64>,
}

/// One fit of the risk sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub model: SamplingModel,
    pub estimator: MseEstimator,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub stream: u64,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub sigma: f64,
    pub lambda_mult: f64,
    pub lambda: f64,
    pub df: usize,
    pub l2pn: f64,
    pub l2p: Option<f64>,
    pub l2p_se: Option<f64>,
    /// Mean squared realized noise.
    pub noise_mse: f64,
    pub converged: bool,
    pub kkt_residual: f64,
}

struct References {
    voronoi: f64,
    epsilon: f64,
}

fn references(model: SamplingModel) -> Result<References> {
    let truth = SamplingModel::truth_descriptor();
    let density = model.density_descriptor();
    Ok(References {
        voronoi: limit_prediction(LimitGraph::Voronoi, &truth, &density, 2)?,
        epsilon: limit_prediction(LimitGraph::Epsilon, &truth, &density, 2)?,
    })
}

/// Predicted limit of the rescaled DTV, or `None` where no closed form exists.
pub fn reference_value(model: SamplingModel, graph: TvGraph) -> Result<Option<f64>> {
    let r = references(model)?;
    Ok(match graph {
        TvGraph::Voronoi => Some(r.voronoi),
        TvGraph::Epsilon => Some(r.epsilon),
        TvGraph::Knn => None,
    })
}

fn tasks(cfg: &ExperimentConfig, ns: &[usize]) -> Vec<(SamplingModel, usize, usize)> {
    let mut out = Vec::new();
    for &m in &cfg.models {
        for &n in ns {
            for rep in 0..cfg.repetitions {
                out.push((m, n, rep));
            }
        }
    }
    out
}

/// Pairs within `eps` whose truth values differ.
fn eps_cut(points: &[Point2], truth: &[f64], eps: f64) -> f64 {
    let mut cut = 0usize;
    for_each_eps_pair(points, eps, |i, j| {
        if truth[i] != truth[j] {
            cut += 1;
        }
    });
    cut as f64
}

/// DTV of `f0` at the design points on each configured graph, for every
/// model, sample size and repetition. Rows come out in the order
/// `models x n_values x repetitions x tv_graphs` whatever the thread count.
pub fn tv_estimation_sweep(cfg: &ExperimentConfig) -> Result<Vec<TvRow>> {
    cfg.validate()?;
    let refs: HashMap<SamplingModel, References> = cfg
        .models
        .iter()
        .map(|&m| Ok((m, references(m)?)))
        .collect::<Result<_>>()?;
    let per_task = tasks(cfg, &cfg.n_values)
        .into_par_iter()
        .map(|(model, n, rep)| {
            let stream = stream_id(Purpose::TvDesign, model, n, rep);
            let points = sample_design_with(model, n, &mut task_rng(cfg.seed, stream));
            let truth: Vec<f64> = points.iter().map(|&p| f0_indicator_ball(p)).collect();
            let nf = n as f64;
            cfg.tv_graphs
                .iter()
                .map(|&graph| {
                    let row = |k, eps, dtv, rescaled_dtv, reference| TvRow {
                        model,
                        graph,
                        n,
                        rep,
                        seed: cfg.seed,
                        stream,
                        k,
                        eps,
                        dtv,
                        rescaled_dtv,
                        reference,
                    };
                    Ok(match graph {
                        TvGraph::Voronoi => {
                            let g = build_voronoi_graph(
                                &voronoi(&points)?,
                                WeightScheme::ExactVoronoi,
                            )?;
                            let dtv = discrete_tv(&g, &truth)?;
                            row(None, None, dtv, dtv, Some(refs[&model].voronoi))
                        }
                        TvGraph::Epsilon => {
                            let eps = cfg.eps(n);
                            let dtv = eps_cut(&points, &truth, eps);
                            row(
                                None,
                                Some(eps),
                                dtv,
                                dtv / (nf * nf * eps.powi(3)),
                                Some(refs[&model].epsilon),
                            )
                        }
                        TvGraph::Knn => {
                            let k = cfg.knn_k(n);
                            let dtv = discrete_tv(&build_knn_graph(&points, k)?, &truth)?;
                            let eps_bar = (k as f64 / nf).sqrt();
                            row(Some(k), None, dtv, dtv / (nf * nf * eps_bar.powi(3)), None)
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_task.into_iter().flatten().collect())
}

/// Monte Carlo points for the `L2(P)` risk, stored as nearest design point
/// and truth value so every fit on the same design is scored on the same draws.
struct McSample {
    nearest: Vec<usize>,
    truth: Vec<f64>,
}

impl McSample {
    fn new(model: SamplingModel, points: &[Point2], count: usize, rng: &mut ChaCha8Rng) -> Self {
        let tree = KdTree::new(points);
        let draws = sample_design_with(model, count, rng);
        Self {
            nearest: draws
                .iter()
                .map(|&x| tree.nearest(x).expect("design is non-empty"))
                .collect(),
            truth: draws.iter().map(|&x| f0_indicator_ball(x)).collect(),
        }
    }

    fn risk(&self, theta: &[f64]) -> (f64, f64) {
        let sq: Vec<f64> = self
            .nearest
            .iter()
            .zip(&self.truth)
            .map(|(&i, t)| (theta[i] - t).powi(2))
            .collect();
        mean_se(&sq)
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn estimator_graph(
    cfg: &ExperimentConfig,
    estimator: MseEstimator,
    points: &[Point2],
    diagram: &mut Option<VoronoiDiagram>,
) -> Result<(WeightedGraph, WeightScheme)> {
    let scheme = cfg.scheme(estimator, points.len());
    let graph = match scheme {
        WeightScheme::Epsilon { eps } => build_eps_graph(points, eps)?,
        WeightScheme::Knn { k } => build_knn_graph(points, k)?,
        _ => {
            if diagram.is_none() {
                *diagram = Some(voronoi(points)?);
            }
            build_voronoi_graph(diagram.as_ref().expect("just built"), scheme)?
        }
    };
    Ok((graph, scheme))
}

/// Fits every configured estimator along the λ grid to noisy draws of `f0`,
/// recording `df = K` and both risks. λ is `lambda_mult * sigma / w_bar`
/// with `w_bar` the graph's mean edge weight. Rows come out in the order
/// `models x mse_n_values x repetitions x estimators x lambda_grid`.
pub fn mse_sweep(cfg: &ExperimentConfig) -> Result<Vec<MseRow>> {
    cfg.validate()?;
    let per_task = tasks(cfg, &cfg.mse_n_values)
        .into_par_iter()
        .map(|(model, n, rep)| {
            let stream = stream_id(Purpose::MseData, model, n, rep);
            let mut rng = task_rng(cfg.seed, stream);
            let points = sample_design_with(model, n, &mut rng);
            let sigma = noise_sigma(model, cfg.snr)?;
            let truth: Vec<f64> = points.iter().map(|&p| f0_indicator_ball(p)).collect();
            let noise: Vec<f64> = (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sigma * z
                })
                .collect();
            let y: Vec<f64> = truth.iter().zip(&noise).map(|(t, z)| t + z).collect();
            let noise_mse = noise.iter().map(|z| z * z).sum::<f64>() / n as f64;
            let mc = (cfg.mc_samples > 0).then(|| {
                let mut mc_rng = task_rng(cfg.seed, stream_id(Purpose::MonteCarlo, model, n, rep));
                McSample::new(model, &points, cfg.mc_samples, &mut mc_rng)
            });

            let mut diagram = None;
            let mut rows = Vec::new();
            for &estimator in &cfg.estimators {
                let (graph, scheme) = estimator_graph(cfg, estimator, &points, &mut diagram)?;
                let w_bar = graph.mean_weight();
                let unit = if w_bar > 0.0 { sigma / w_bar } else { sigma };
                let lambdas: Vec<f64> = cfg.lambda_grid.iter().map(|m| m * unit).collect();
                let fits = tv_denoise_path(&graph, &y, &lambdas, &cfg.solver)?;
                let (k, eps) = match scheme {
                    WeightScheme::Knn { k } => (Some(k), None),
                    WeightScheme::Epsilon { eps } => (None, Some(eps)),
                    _ => (None, None),
                };
                for (fit, &lambda_mult) in fits.iter().zip(&cfg.lambda_grid) {
                    let risk = mc.as_ref().map(|s| s.risk(&fit.theta));
                    rows.push(MseRow {
                        model,
                        estimator,
                        n,
                        rep,
                        seed: cfg.seed,
                        stream,
                        k,
                        eps,
                        sigma,
                        lambda_mult,
                        lambda: fit.lambda,
                        df: fit.n_components,
                        l2pn: crate::estimators::l2_pn_error(&fit.theta, &truth)?,
                        l2p: risk.map(|r| r.0),
                        l2p_se: risk.map(|r| r.1),
                        noise_mse,
                        converged: fit.diagnostics.converged,
                        kkt_residual: fit.diagnostics.kkt_residual,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_task.into_iter().flatten().collect())
}

/// Writes rows as CSV with a header naming every field.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// Groups by `key`, keeping groups in order of first appearance.
fn group_by<T, K: Eq + Hash + Clone>(rows: &[T], key: impl Fn(&T) -> K) -> Vec<(K, Vec<&T>)> {
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut groups: Vec<(K, Vec<&T>)> = Vec::new();
    for r in rows {
        let k = key(r);
        let slot = *index.entry(k.clone()).or_insert_with(|| {
            groups.push((k, Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(r);
    }
    groups
}

/// Mean over repetitions of one `(model, graph, n)` cell of the TV sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvSummary {
    pub model: SamplingModel,
    pub graph: TvGraph,
    pub n: usize,
    pub reps: usize,
    pub mean_dtv: f64,
    pub mean_rescaled: f64,
    pub se_rescaled: f64,
    pub reference: Option<f64>,
}

pub fn summarize_tv(rows: &[TvRow]) -> Vec<TvSummary> {
    group_by(rows, |r| (r.model, r.graph, r.n))
        .into_iter()
        .map(|((model, graph, n), g)| {
            let dtv: Vec<f64> = g.iter().map(|r| r.dtv).collect();
            let resc: Vec<f64> = g.iter().map(|r| r.rescaled_dtv).collect();
            let (mean_rescaled, se_rescaled) = mean_se(&resc);
            TvSummary {
                model,
                graph,
                n,
                reps: g.len(),
                mean_dtv: mean_se(&dtv).0,
                mean_rescaled,
                se_rescaled,
                reference: g[0].reference,
            }
        })
        .collect()
}

/// Mean over repetitions of one `(model, estimator, n, lambda_mult)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseSummary {
    pub model: SamplingModel,
    pub estimator: MseEstimator,
    pub n: usize,
    pub lambda_mult: f64,
    pub reps: usize,
    pub mean_df: f64,
    pub mean_l2pn: f64,
    pub se_l2pn: f64,
    pub mean_l2p: Option<f64>,
}

pub fn summarize_mse(rows: &[MseRow]) -> Vec<MseSummary> {
    group_by(rows, |r| {
        (r.model, r.estimator, r.n, r.lambda_mult.to_bits())
    })
    .into_iter()
    .map(|((model, estimator, n, mult), g)| {
        let df: Vec<f64> = g.iter().map(|r| r.df as f64).collect();
        let l2pn: Vec<f64> = g.iter().map(|r| r.l2pn).collect();
        let (mean_l2pn, se_l2pn) = mean_se(&l2pn);
        let l2p: Option<Vec<f64>> = g.iter().map(|r| r.l2p).collect();
        MseSummary {
            model,
            estimator,
            n,
            lambda_mult: f64::from_bits(mult),
            reps: g.len(),
            mean_df: mean_se(&df).0,
            mean_l2pn,
            se_l2pn,
            mean_l2p: l2p.map(|v| mean_se(&v).0),
        }
    })
    .collect()
}

/// The grid point with the smallest mean `L2(Pn)` risk for one cell.
pub fn optimal_risk(
    summaries: &[MseSummary],
    model: SamplingModel,
    estimator: MseEstimator,
    n: usize,
) -> Option<&MseSummary> {
    summaries
        .iter()
        .filter(|s| s.model == model && s.estimator == estimator && s.n == n)
        .min_by(|a, b| a.mean_l2pn.total_cmp(&b.mean_l2pn))
}
