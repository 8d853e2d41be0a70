use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::SamplingModel;
use crate::error::{Error, Result};
use crate::graph::WeightScheme;
use crate::solver::SolverOptions;

/// Graphs whose DTV of the truth is tracked in the TV sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvGraph {
    Voronoi,
    Epsilon,
    Knn,
}

impl fmt::Display for TvGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Voronoi => "voronoi",
            Self::Epsilon => "epsilon",
            Self::Knn => "knn",
        })
    }
}

/// Estimators compared in the risk sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MseEstimator {
    /// Exact facet-length weights.
    WeightedVoronoi,
    /// Unit weights on the Voronoi adjacency graph.
    UnitVoronoi,
    Epsilon,
    Knn,
}

impl fmt::Display for MseEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::WeightedVoronoi => "weighted_voronoi",
            Self::UnitVoronoi => "unit_voronoi",
            Self::Epsilon => "epsilon",
            Self::Knn => "knn",
        })
    }
}

fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (count - 1) as f64))
        .collect()
}

/// Settings shared by both sweeps. Every field has a default, so `{}` is a
/// valid config; unknown fields are rejected.
///
/// The graph constants set `k = floor(c1 * log(n)^log_power)` and
/// `eps = c2 * (log(n)^log_power / n)^(1/2)`. The defaults for `c1` and `c2`
/// match the average kNN and eps degrees to the Voronoi average degree at
/// `n = 1274` under the uniform design (see [`super::calibrate_graph_constants`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub models: Vec<SamplingModel>,
    /// Sample sizes of the TV sweep.
    pub n_values: Vec<usize>,
    pub repetitions: usize,
    pub tv_graphs: Vec<TvGraph>,
    pub c1: f64,
    pub c2: f64,
    pub log_power: f64,
    pub snr: f64,
    /// Sample sizes of the risk sweep.
    pub mse_n_values: Vec<usize>,
    pub estimators: Vec<MseEstimator>,
    /// Tuning parameters in units of `sigma / (mean edge weight)`.
    pub lambda_grid: Vec<f64>,
    /// Monte Carlo draws for the `L2(P)` risk; 0 skips it.
    pub mc_samples: usize,
    pub solver: SolverOptions,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut lambda_grid = vec![0.0];
        lambda_grid.extend(log_spaced(-3.0, 2.0, 21));
        Self {
            seed: 2024,
            models: SamplingModel::ALL.to_vec(),
            n_values: log_spaced(2.0, 5.0, 7)
                .into_iter()
                .map(|n| n.round() as usize)
                .collect(),
            repetitions: 20,
            tv_graphs: vec![TvGraph::Voronoi, TvGraph::Epsilon, TvGraph::Knn],
            c1: DEFAULT_C1,
            c2: DEFAULT_C2,
            log_power: 1.1,
            snr: 1.0,
            mse_n_values: vec![1274],
            estimators: vec![
                MseEstimator::WeightedVoronoi,
                MseEstimator::UnitVoronoi,
                MseEstimator::Epsilon,
                MseEstimator::Knn,
            ],
            lambda_grid,
            mc_samples: 100_000,
            solver: SolverOptions::default(),
            output_dir: None,
        }
    }
}

/// Frozen calibration results.
pub const DEFAULT_C1: f64 = 0.6319;
pub const DEFAULT_C2: f64 = 0.4683;

/// Stream ids pack the sample size into 32 bits and the repetition into 24.
const MAX_N: usize = u32::MAX as usize;
const MAX_REPS: usize = 1 << 24;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.models.is_empty() {
            return bad("at least one sampling model is required".into());
        }
        for (name, ns) in [
            ("n_values", &self.n_values),
            ("mse_n_values", &self.mse_n_values),
        ] {
            if let Some(&n) = ns.iter().find(|&&n| !(10..=MAX_N).contains(&n)) {
                return bad(format!("{name}: n must lie in [10, {MAX_N}], got {n}"));
            }
        }
        if !(1..MAX_REPS).contains(&self.repetitions) {
            return bad(format!(
                "repetitions must lie in [1, {MAX_REPS}), got {}",
                self.repetitions
            ));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("snr", self.snr)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.log_power >= 0.0 && self.log_power.is_finite()) {
            return bad(format!(
                "log_power must be non-negative, got {}",
                self.log_power
            ));
        }
        if self.lambda_grid.is_empty()
            || self
                .lambda_grid
                .iter()
                .any(|l| !(*l >= 0.0 && l.is_finite()))
        {
            return bad("lambda_grid must be a non-empty list of non-negative numbers".into());
        }
        if self.mc_samples == 1 {
            return bad("mc_samples must be 0 or at least 2".into());
        }
        let s = &self.solver;
        if s.max_iter == 0 || !(s.eps_abs >= 0.0 && s.eps_rel >= 0.0 && s.kkt_tol >= 0.0) {
            return bad("solver tolerances must be non-negative and max_iter positive".into());
        }
        if s.rho.is_some_and(|r| !(r > 0.0 && r.is_finite()))
            || s.fuse_tol.is_some_and(|t| !(t >= 0.0))
        {
            return bad("solver rho must be positive and fuse_tol non-negative".into());
        }
        Ok(())
    }

    fn log_factor(&self, n: usize) -> f64 {
        (n as f64).ln().powf(self.log_power)
    }

    /// `floor(c1 * log(n)^log_power)`, kept within `[1, n - 1]`.
    pub fn knn_k(&self, n: usize) -> usize {
        ((self.c1 * self.log_factor(n)).floor() as usize).clamp(1, n.saturating_sub(1).max(1))
    }

    /// `c2 * (log(n)^log_power / n)^(1/2)`.
    pub fn eps(&self, n: usize) -> f64 {
        self.c2 * (self.log_factor(n) / n as f64).sqrt()
    }

    pub(crate) fn scheme(&self, estimator: MseEstimator, n: usize) -> WeightScheme {
        match estimator {
            MseEstimator::WeightedVoronoi => WeightScheme::ExactVoronoi,
            MseEstimator::UnitVoronoi => WeightScheme::UnitVoronoi,
            MseEstimator::Epsilon => WeightScheme::Epsilon { eps: self.eps(n) },
            MseEstimator::Knn => WeightScheme::Knn { k: self.knn_k(n) },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(
            cfg.n_values,
            vec![100, 316, 1000, 3162, 10000, 31623, 100000]
        );
        assert_eq!(cfg.lambda_grid.len(), 22);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), cfg);
    }

    #[test]
    fn partial_and_invalid_configs() {
        let cfg = ExperimentConfig::from_json(
            r#"{"seed": 7, "models": ["lowtube"], "solver": {"max_iter": 50}}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.models, vec![SamplingModel::LowTube]);
        assert_eq!(cfg.solver.max_iter, 50);
        for bad in [
            r#"{"n_values": [5]}"#,
            r#"{"repetitions": 0}"#,
            r#"{"snr": -1}"#,
            r#"{"lambda_grid": []}"#,
            r#"{"typo": 1}"#,
            r#"{"models": ["square"]}"#,
            r#"{"models": []}"#,
        ] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn graph_parameters() {
        let cfg = ExperimentConfig {
            c1: 1.0,
            c2: 1.0,
            log_power: 1.0,
            ..Default::default()
        };
        let n = 1000;
        assert_eq!(cfg.knn_k(n), (1000f64).ln().floor() as usize);
        assert!((cfg.eps(n) - ((1000f64).ln() / 1000.0).sqrt()).abs() < 1e-15);
        let tiny = ExperimentConfig {
            c1: 1e-6,
            ..Default::default()
        };
        assert_eq!(tiny.knn_k(100), 1);
    }
}
