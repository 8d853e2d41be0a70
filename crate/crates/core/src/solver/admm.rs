use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use super::flow::pcg;
use super::kkt::{kkt_certificate, node_cut_bound};
use super::{value_range, ComponentStat, Diagnostics, SolverOptions, TvFit};
use crate::error::{check_len, Error, Result};
use crate::graph::{UnionFind, WeightedGraph};

const POLISH_EVERY: usize = 25;
const BALANCE_EVERY: usize = 10;
/// Over-relaxation factor.
const RELAX: f64 = 1.6;

/// ADMM state carried between fits along a lambda path.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub theta: Vec<f64>,
    pub z: Vec<f64>,
    /// Scaled dual variable.
    pub u: Vec<f64>,
    pub rho: f64,
}

/// Solves `min 1/2 |y - theta|^2 + lambda |D theta|_1` on `graph`.
///
/// Non-convergence is reported through `diagnostics.converged`; the returned
/// iterate is the best available.
pub fn tv_denoise(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    opts: &SolverOptions,
) -> Result<TvFit> {
    Ok(solve(graph, y, lambda, opts, None)?.0)
}

/// Fits every lambda in `lambdas`, visiting them in decreasing order with warm
/// starts. Results are returned in the input order.
pub fn tv_denoise_path(
    graph: &WeightedGraph,
    y: &[f64],
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<TvFit>> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut out: Vec<Option<TvFit>> = vec![None; lambdas.len()];
    let mut warm: Option<WarmStart> = None;
    for k in order {
        let (fit, state) = solve(graph, y, lambdas[k], opts, warm.as_ref())?;
        warm = Some(state);
        out[k] = Some(fit);
    }
    Ok(out
        .into_iter()
        .map(|f| f.expect("every lambda fitted"))
        .collect())
}

fn validate(graph: &WeightedGraph, y: &[f64], lambda: f64) -> Result<()> {
    check_len(graph.n(), y.len())?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("responses must be finite".into()));
    }
    Ok(())
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn solve(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    opts: &SolverOptions,
    warm: Option<&WarmStart>,
) -> Result<(TvFit, WarmStart)> {
    validate(graph, y, lambda)?;
    let n = graph.n();
    let m = graph.m();
    let fuse_tol = opts.fuse_tol_for(y);

    if lambda == 0.0 || m == 0 {
        let theta = y.to_vec();
        let state = WarmStart {
            theta: theta.clone(),
            z: graph.incidence().apply(&theta),
            u: vec![0.0; m],
            rho: 1.0,
        };
        let diag = Diagnostics {
            converged: true,
            ..Default::default()
        };
        return Ok((finalize(graph, y, lambda, theta, fuse_tol, diag)?, state));
    }

    let d = graph.incidence();
    let gram_diag = d.gram_diagonal();
    let mut rho = match (opts.rho, warm) {
        (Some(r), _) => r,
        (None, Some(w)) => w.rho,
        (None, None) => (lambda * graph.mean_weight()).max(1e-12),
    };
    let (mut theta, mut z, mut u) = match warm {
        Some(w) if w.theta.len() == n && w.z.len() == m => {
            (w.theta.clone(), w.z.clone(), w.u.clone())
        }
        _ => {
            let z = d.apply(y);
            (y.to_vec(), z, vec![0.0; m])
        }
    };

    let y_scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let accept = opts.kkt_tol * y_scale;
    let mut dtheta = vec![0.0; m];
    let mut tmp_m = vec![0.0; m];
    let mut rhs = vec![0.0; n];
    let mut tmp_n = vec![0.0; n];
    let mut z_old = vec![0.0; m];
    let mut tried = HashSet::new();
    let mut rel_primal = 1.0f64;
    let mut diag = Diagnostics::default();
    let mut polished: Option<Vec<f64>> = None;

    for iter in 1..=opts.max_iter {
        diag.iterations = iter;
        // theta-update: (I + rho D^T D) theta = y + rho D^T (z - u)
        for l in 0..m {
            tmp_m[l] = z[l] - u[l];
        }
        d.apply_transpose_into(&tmp_m, &mut tmp_n);
        for i in 0..n {
            rhs[i] = y[i] + rho * tmp_n[i];
        }
        let precond: Vec<f64> = gram_diag.iter().map(|g| 1.0 + rho * g).collect();
        let apply = |x: &[f64], out: &mut [f64]| {
            d.gram_into(x, out);
            for i in 0..n {
                out[i] = x[i] + rho * out[i];
            }
        };
        // inexact solves early on, tightening with the primal residual
        let cg_tol = (1e-3 * rel_primal).clamp(1e-13, 1e-4);
        pcg(apply, &precond, &rhs, &mut theta, cg_tol, 2000);

        d.apply_into(&theta, &mut dtheta);
        z_old.copy_from_slice(&z);
        let t = lambda / rho;
        for l in 0..m {
            let relaxed = RELAX * dtheta[l] + (1.0 - RELAX) * z_old[l];
            z[l] = soft(relaxed + u[l], t);
            u[l] += relaxed - z[l];
        }

        for l in 0..m {
            tmp_m[l] = dtheta[l] - z[l];
        }
        let r_norm = norm(&tmp_m);
        for l in 0..m {
            tmp_m[l] = z[l] - z_old[l];
        }
        d.apply_transpose_into(&tmp_m, &mut tmp_n);
        let s_norm = rho * norm(&tmp_n);
        d.apply_transpose_into(&u, &mut tmp_n);
        let eps_pri = (m as f64).sqrt() * opts.eps_abs + opts.eps_rel * norm(&dtheta).max(norm(&z));
        let eps_dual = (n as f64).sqrt() * opts.eps_abs + opts.eps_rel * rho * norm(&tmp_n);
        diag.primal_residual = r_norm;
        rel_primal = r_norm / norm(&dtheta).max(norm(&z)).max(f64::MIN_POSITIVE);
        diag.dual_residual = s_norm;
        let done = r_norm <= eps_pri && s_norm <= eps_dual;

        if opts.polish && (iter % POLISH_EVERY == 0 || done) {
            if let Some(candidate) =
                try_polish(graph, y, lambda, &theta, &z, fuse_tol, accept, &mut tried)?
            {
                polished = Some(candidate);
                diag.polished = true;
                diag.converged = true;
                break;
            }
        }
        if done {
            diag.converged = true;
            break;
        }

        if iter % BALANCE_EVERY == 0 {
            if r_norm > 10.0 * s_norm {
                rho *= 2.0;
                u.iter_mut().for_each(|v| *v *= 0.5);
            } else if s_norm > 10.0 * r_norm {
                rho *= 0.5;
                u.iter_mut().for_each(|v| *v *= 2.0);
            }
        }
    }

    let state = WarmStart {
        theta: theta.clone(),
        z,
        u,
        rho,
    };
    let final_theta = polished.unwrap_or(theta);
    Ok((
        finalize(graph, y, lambda, final_theta, fuse_tol, diag)?,
        state,
    ))
}

/// Builds candidate partitions from the current iterate (the zero pattern of
/// `z`, then `theta` fused at a ladder of tolerances), polishes each and
/// returns the first one whose certificate passes.
#[allow(clippy::too_many_arguments)]
fn try_polish(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    theta: &[f64],
    z: &[f64],
    fuse_tol: f64,
    accept: f64,
    tried: &mut HashSet<u64>,
) -> Result<Option<Vec<f64>>> {
    let edges = graph.edges();
    let sign: Vec<f64> = edges
        .iter()
        .zip(z)
        .map(|(e, &zl)| {
            let d = if zl != 0.0 {
                zl
            } else {
                theta[e.i] - theta[e.j]
            };
            if d == 0.0 {
                0.0
            } else {
                d.signum()
            }
        })
        .collect();
    let scale = value_range(y);
    for tol in [None, Some(1e-2), Some(1e-4), Some(1e-6)] {
        let mut uf = UnionFind::new(graph.n());
        for (l, e) in edges.iter().enumerate() {
            let fused = match tol {
                None => z[l] == 0.0,
                Some(t) => (theta[e.i] - theta[e.j]).abs() <= t * scale,
            };
            if fused {
                uf.union(e.i, e.j);
            }
        }
        let (labels, candidate) = polish(graph, y, lambda, uf, &sign, fuse_tol);
        let mut h = DefaultHasher::new();
        labels.hash(&mut h);
        if !tried.insert(h.finish()) {
            continue;
        }
        if node_cut_bound(graph, y, lambda, &candidate, fuse_tol) > accept {
            continue;
        }
        let r = kkt_certificate(graph, y, lambda, &candidate, fuse_tol)?.residual;
        if r <= accept {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

/// Closed-form values for a fixed partition and fixed signs on the edges
/// between parts: each part takes its mean response shifted by the
/// subgradient mass entering through its boundary.
fn component_values(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    labels: &[usize],
    k: usize,
    sign: &[f64],
) -> Vec<f64> {
    let mut sum = vec![0.0; k];
    let mut size = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        sum[c] += y[i];
        size[c] += 1;
    }
    for (e, &s) in graph.edges().iter().zip(sign) {
        let (a, b) = (labels[e.i], labels[e.j]);
        // edges inside a part cancel
        if a != b {
            sum[a] -= lambda * e.w * s;
            sum[b] += lambda * e.w * s;
        }
    }
    sum.iter().zip(&size).map(|(s, &c)| s / c as f64).collect()
}

/// Merges neighbouring parts whose closed-form values contradict the sign
/// assumed for the edge between them, until the partition is consistent.
fn polish(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    mut uf: UnionFind,
    sign: &[f64],
    fuse_tol: f64,
) -> (Vec<usize>, Vec<f64>) {
    loop {
        let (labels, k) = uf.labels();
        let v = component_values(graph, y, lambda, &labels, k, sign);
        let mut merged = false;
        for (e, &s) in graph.edges().iter().zip(sign) {
            let (a, b) = (labels[e.i], labels[e.j]);
            if a != b && (v[a] - v[b]) * s <= fuse_tol {
                uf.union(e.i, e.j);
                merged = true;
            }
        }
        if !merged {
            let theta = labels.iter().map(|&c| v[c]).collect();
            return (labels, theta);
        }
    }
}

fn finalize(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    theta: Vec<f64>,
    fuse_tol: f64,
    mut diag: Diagnostics,
) -> Result<TvFit> {
    let cert = kkt_certificate(graph, y, lambda, &theta, fuse_tol)?;
    diag.kkt_residual = cert.residual;
    let k = cert.n_components;
    let v = graph.incidence().apply_transpose(&cert.dual);
    let mut ysum = vec![0.0; k];
    let mut ssum = vec![0.0; k];
    let mut size = vec![0usize; k];
    for i in 0..graph.n() {
        let c = cert.labels[i];
        ysum[c] += y[i];
        ssum[c] += lambda * v[i];
        size[c] += 1;
    }
    let component_stats = (0..k)
        .map(|c| ComponentStat {
            ybar: ysum[c] / size[c] as f64,
            shrink: ssum[c] / size[c] as f64,
        })
        .collect();
    Ok(TvFit {
        theta,
        lambda,
        fuse_tol,
        labels: cert.labels,
        n_components: k,
        component_stats,
        diagnostics: diag,
    })
}
