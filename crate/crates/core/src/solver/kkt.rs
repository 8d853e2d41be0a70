//! Optimality certificate for graph TV denoising.
//!
//! `theta` is optimal iff `y - theta = lambda D^T s` for some `s` with
//! `s_l = sign((D theta)_l)` on edges that are not fused and `|s_l| <= 1` on
//! fused edges. With the non-fused signs fixed, finding the fused duals is a
//! capacitated flow problem on each fused component: edge `l` may carry at
//! most `w_l` units and node `i` must emit `r_i / lambda` units, where `r` is
//! what the fixed signs leave unexplained. The least-squares flow (a
//! Laplacian solve) is tried first; components where it exceeds capacity are
//! re-solved exactly with max-flow.

use super::flow::{pcg, FlowNetwork};
use super::TvFit;
use crate::error::{check_len, Error, Result};
use crate::graph::{components_where, WeightedGraph};

#[derive(Debug, Clone)]
pub struct KktCertificate {
    /// `min_s |theta - y + lambda D^T s|_inf` over the admissible duals (an
    /// upper bound when the flow step is inexact).
    pub residual: f64,
    /// The dual vector achieving `residual`, one entry per edge.
    pub dual: Vec<f64>,
    pub labels: Vec<usize>,
    pub n_components: usize,
}

pub fn kkt_residual(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    theta: &[f64],
    fuse_tol: f64,
) -> Result<f64> {
    Ok(kkt_certificate(graph, y, lambda, theta, fuse_tol)?.residual)
}

pub fn kkt_certificate(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    theta: &[f64],
    fuse_tol: f64,
) -> Result<KktCertificate> {
    let n = graph.n();
    check_len(n, y.len())?;
    check_len(n, theta.len())?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let edges = graph.edges();
    let m = edges.len();
    let fused: Vec<bool> = edges
        .iter()
        .map(|e| (theta[e.i] - theta[e.j]).abs() <= fuse_tol)
        .collect();
    let (labels, n_components) =
        components_where(graph, |e| (theta[e.i] - theta[e.j]).abs() <= fuse_tol);

    if lambda == 0.0 {
        let residual = y
            .iter()
            .zip(theta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        return Ok(KktCertificate {
            residual,
            dual: vec![0.0; m],
            labels,
            n_components,
        });
    }

    let (mut dual, b, b0) = supplies(graph, y, lambda, theta, &fused, &labels, n_components);

    // least-squares flow: L phi = b0, s = D_fused phi
    let mut diag = vec![0.0; n];
    for (l, e) in edges.iter().enumerate() {
        if fused[l] {
            diag[e.i] += e.w * e.w;
            diag[e.j] += e.w * e.w;
        }
    }
    let laplacian = |x: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (l, e) in edges.iter().enumerate() {
            if fused[l] {
                let d = e.w * e.w * (x[e.i] - x[e.j]);
                out[e.i] += d;
                out[e.j] -= d;
            }
        }
    };
    let mut phi = vec![0.0; n];
    pcg(laplacian, &diag, &b0, &mut phi, 1e-15, 10 * n + 100);
    let mut over = vec![false; n_components];
    for (l, e) in edges.iter().enumerate() {
        if fused[l] {
            let s = e.w * (phi[e.i] - phi[e.j]);
            if s.abs() > 1.0 {
                over[labels[e.i]] = true;
            }
            dual[l] = s.clamp(-1.0, 1.0);
        }
    }

    if over.iter().any(|&o| o) {
        let ls_err = component_errors(graph, &fused, &labels, n_components, &dual, &b);
        let mut flow_dual = dual.clone();
        flow_fill(graph, &fused, &labels, &over, &b0, &mut flow_dual);
        let flow_err = component_errors(graph, &fused, &labels, n_components, &flow_dual, &b);
        for (l, e) in edges.iter().enumerate() {
            let k = labels[e.i];
            if fused[l] && over[k] && flow_err[k] < ls_err[k] {
                dual[l] = flow_dual[l];
            }
        }
    }

    let residual = lambda
        * component_errors(graph, &fused, &labels, n_components, &dual, &b)
            .into_iter()
            .fold(0.0, f64::max);
    Ok(KktCertificate {
        residual,
        dual,
        labels,
        n_components,
    })
}

/// Fixed duals on non-fused edges, the scaled supply
/// `b = (y - theta - lambda D_fixed^T s_fixed) / lambda` and `b` with its
/// component means removed.
fn supplies(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    theta: &[f64],
    fused: &[bool],
    labels: &[usize],
    k: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = graph.n();
    let mut dual = vec![0.0; graph.m()];
    let mut b: Vec<f64> = y.iter().zip(theta).map(|(a, t)| (a - t) / lambda).collect();
    for (l, e) in graph.edges().iter().enumerate() {
        if !fused[l] {
            let s = (theta[e.i] - theta[e.j]).signum();
            dual[l] = s;
            b[e.i] -= e.w * s;
            b[e.j] += e.w * s;
        }
    }
    // the mean part cannot be explained by any flow
    let mut sum = vec![0.0; k];
    let mut size = vec![0usize; k];
    for i in 0..n {
        sum[labels[i]] += b[i];
        size[labels[i]] += 1;
    }
    let b0 = (0..n)
        .map(|i| b[i] - sum[labels[i]] / size[labels[i]] as f64)
        .collect();
    (dual, b, b0)
}

/// Lower bound on the certificate residual from single-node cuts: node `i`
/// can pass at most the total weight of its fused edges. Cheap screen for
/// candidates that are far from optimal.
pub(crate) fn node_cut_bound(
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
    theta: &[f64],
    fuse_tol: f64,
) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let edges = graph.edges();
    let fused: Vec<bool> = edges
        .iter()
        .map(|e| (theta[e.i] - theta[e.j]).abs() <= fuse_tol)
        .collect();
    let (labels, k) = components_where(graph, |e| (theta[e.i] - theta[e.j]).abs() <= fuse_tol);
    let (_, b, b0) = supplies(graph, y, lambda, theta, &fused, &labels, k);
    let mut cap = vec![0.0; graph.n()];
    for (l, e) in edges.iter().enumerate() {
        if fused[l] {
            cap[e.i] += e.w;
            cap[e.j] += e.w;
        }
    }
    // each node passes at most its fused capacity, and a component's net
    // flow is zero so its mean supply is never absorbed
    (0..graph.n())
        .map(|i| lambda * (b[i].abs() - cap[i]).max((b[i] - b0[i]).abs()))
        .fold(0.0, f64::max)
}

/// Per-component `|D_fused^T s - b|_inf`.
fn component_errors(
    graph: &WeightedGraph,
    fused: &[bool],
    labels: &[usize],
    k: usize,
    dual: &[f64],
    b: &[f64],
) -> Vec<f64> {
    let mut v: Vec<f64> = b.iter().map(|x| -x).collect();
    for ((e, s), _) in graph
        .edges()
        .iter()
        .zip(dual)
        .zip(fused)
        .filter(|(_, &f)| f)
    {
        v[e.i] += e.w * s;
        v[e.j] -= e.w * s;
    }
    let mut err = vec![0.0f64; k];
    for (i, x) in v.iter().enumerate() {
        err[labels[i]] = err[labels[i]].max(x.abs());
    }
    err
}

/// Exact feasibility flows for the flagged components, written into `dual`.
fn flow_fill(
    graph: &WeightedGraph,
    fused: &[bool],
    labels: &[usize],
    flagged: &[bool],
    supply: &[f64],
    dual: &mut [f64],
) {
    let n = graph.n();
    let mut local = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); flagged.len()];
    for i in 0..n {
        if flagged[labels[i]] {
            local[i] = members[labels[i]].len();
            members[labels[i]].push(i);
        }
    }
    let mut comp_edges: Vec<Vec<usize>> = vec![Vec::new(); flagged.len()];
    for (l, e) in graph.edges().iter().enumerate() {
        if fused[l] && flagged[labels[e.i]] {
            comp_edges[labels[e.i]].push(l);
        }
    }
    for (k, nodes) in members.iter().enumerate() {
        if !flagged[k] {
            continue;
        }
        let size = nodes.len();
        let (src, sink) = (size, size + 1);
        let scale = nodes.iter().map(|&i| supply[i].abs()).fold(0.0, f64::max);
        let mut net = FlowNetwork::new(size + 2, 1e-15 * scale.max(f64::MIN_POSITIVE));
        let mut arcs = Vec::with_capacity(comp_edges[k].len());
        for &l in &comp_edges[k] {
            let e = graph.edges()[l];
            arcs.push((
                l,
                local[e.i],
                net.add_undirected(local[e.i], local[e.j], e.w),
                e.w,
            ));
        }
        for (li, &i) in nodes.iter().enumerate() {
            let s = supply[i];
            if s > 0.0 {
                net.add_arc(src, li, s);
            } else if s < 0.0 {
                net.add_arc(li, sink, -s);
            }
        }
        net.max_flow(src, sink);
        for (l, u, pos, w) in arcs {
            // net flow i -> j equals w minus the remaining forward capacity
            let g = w - net.residual(u, pos);
            dual[l] = (g / w).clamp(-1.0, 1.0);
        }
    }
}

/// Largest deviation of `theta_i` from `ybar_k - shat_k` over the fit's
/// components, where `shat_k` averages `lambda (D^T s)_i` over component `k`
/// for the certificate's dual `s`.
pub fn shrunken_average_check(
    fit: &TvFit,
    graph: &WeightedGraph,
    y: &[f64],
    lambda: f64,
) -> Result<f64> {
    let cert = kkt_certificate(graph, y, lambda, &fit.theta, fit.fuse_tol)?;
    let v = graph.incidence().apply_transpose(&cert.dual);
    let k = fit.n_components;
    let mut ysum = vec![0.0; k];
    let mut ssum = vec![0.0; k];
    let mut size = vec![0usize; k];
    for i in 0..graph.n() {
        let c = fit.labels[i];
        ysum[c] += y[i];
        ssum[c] += lambda * v[i];
        size[c] += 1;
    }
    Ok((0..graph.n())
        .map(|i| {
            let c = fit.labels[i];
            let target = (ysum[c] - ssum[c]) / size[c] as f64;
            (fit.theta[i] - target).abs()
        })
        .fold(0.0, f64::max))
}
