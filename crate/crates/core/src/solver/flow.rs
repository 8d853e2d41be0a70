//! Dinic max-flow on small undirected networks with real capacities, plus a
//! preconditioned conjugate-gradient helper shared by the solver.

use std::collections::VecDeque;

struct Arc {
    to: usize,
    rev: usize,
    cap: f64,
}

pub(crate) struct FlowNetwork {
    adj: Vec<Vec<Arc>>,
    tiny: f64,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize, tiny: f64) -> Self {
        Self {
            adj: (0..nodes).map(|_| Vec::new()).collect(),
            tiny,
        }
    }

    /// Directed arc `u -> v`; returns its position in `adj[u]`.
    pub(crate) fn add_arc(&mut self, u: usize, v: usize, cap: f64) -> usize {
        self.add_pair(u, v, cap, 0.0)
    }

    /// Undirected edge of capacity `cap` each way; returns its position in `adj[u]`.
    pub(crate) fn add_undirected(&mut self, u: usize, v: usize, cap: f64) -> usize {
        self.add_pair(u, v, cap, cap)
    }

    fn add_pair(&mut self, u: usize, v: usize, cap_uv: f64, cap_vu: f64) -> usize {
        let iu = self.adj[u].len();
        let iv = self.adj[v].len();
        self.adj[u].push(Arc {
            to: v,
            rev: iv,
            cap: cap_uv,
        });
        self.adj[v].push(Arc {
            to: u,
            rev: iu,
            cap: cap_vu,
        });
        iu
    }

    pub(crate) fn residual(&self, u: usize, pos: usize) -> f64 {
        self.adj[u][pos].cap
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.adj.len();
        let mut total = 0.0;
        let mut level = vec![usize::MAX; n];
        let mut it = vec![0usize; n];
        loop {
            level.iter_mut().for_each(|l| *l = usize::MAX);
            level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for a in &self.adj[u] {
                    if a.cap > self.tiny && level[a.to] == usize::MAX {
                        level[a.to] = level[u] + 1;
                        q.push_back(a.to);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            it.iter_mut().for_each(|i| *i = 0);
            total += self.blocking_flow(s, t, &mut level, &mut it);
        }
    }

    /// Saturates the level graph using an explicit path stack.
    fn blocking_flow(&mut self, s: usize, t: usize, level: &mut [usize], it: &mut [usize]) -> f64 {
        let mut total = 0.0;
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let push = path
                    .iter()
                    .map(|&(v, k)| self.adj[v][k].cap)
                    .fold(f64::INFINITY, f64::min);
                for &(v, k) in &path {
                    let (to, rev) = (self.adj[v][k].to, self.adj[v][k].rev);
                    self.adj[v][k].cap -= push;
                    self.adj[to][rev].cap += push;
                }
                total += push;
                path.clear();
                u = s;
                continue;
            }
            let mut advanced = false;
            while it[u] < self.adj[u].len() {
                let a = &self.adj[u][it[u]];
                if a.cap > self.tiny && level[a.to] == level[u] + 1 {
                    path.push((u, it[u]));
                    u = a.to;
                    advanced = true;
                    break;
                }
                it[u] += 1;
            }
            if advanced {
                continue;
            }
            if u == s {
                return total;
            }
            level[u] = usize::MAX;
            let (prev, k) = path
                .pop()
                .expect("non-source node has a parent on the path");
            it[prev] = k + 1;
            u = prev;
        }
    }
}

/// Jacobi-preconditioned conjugate gradient for a symmetric positive
/// (semi-)definite operator. Entries with zero diagonal are left untouched.
/// Returns the iteration count.
pub(crate) fn pcg<A: Fn(&[f64], &mut [f64])>(
    apply: A,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> usize {
    let n = b.len();
    let inv: Vec<f64> = diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = (0..n)
        .map(|i| if inv[i] > 0.0 { b[i] - ax[i] } else { 0.0 })
        .collect();
    let bnorm = b
        .iter()
        .zip(&inv)
        .filter(|(_, &v)| v > 0.0)
        .map(|(v, _)| v * v)
        .sum::<f64>()
        .sqrt();
    if bnorm == 0.0 {
        x.iter_mut()
            .zip(&inv)
            .filter(|(_, &v)| v > 0.0)
            .for_each(|(x, _)| *x = 0.0);
        return 0;
    }
    let target = rel_tol * bnorm;
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for k in 0..max_iter {
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= target {
            return k;
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return k;
        }
        let alpha = rz / pap;
        for i in 0..n {
            if inv[i] > 0.0 {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    max_iter
}
