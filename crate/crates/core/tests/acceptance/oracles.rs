//! Reference computations that share no code with the library.

use std::f64::consts::PI;

use voronoigram::geometry::Point2;

/// Cell of `points[i]` in the unit square by brute-force half-plane
/// clipping. Each vertex carries the index of the neighbour whose bisector
/// holds the edge leaving it (`None` on the square boundary).
pub fn clipped_cell(points: &[Point2], i: usize) -> Vec<(Point2, Option<usize>)> {
    let mut poly = vec![
        (Point2::new(0.0, 0.0), None),
        (Point2::new(1.0, 0.0), None),
        (Point2::new(1.0, 1.0), None),
        (Point2::new(0.0, 1.0), None),
    ];
    let p = points[i];
    for (j, q) in points.iter().enumerate() {
        if j == i {
            continue;
        }
        // keep {x : (x - m) . (q - p) <= 0}
        let (nx, ny) = (q.x - p.x, q.y - p.y);
        let c = 0.5 * (nx * (p.x + q.x) + ny * (p.y + q.y));
        let side = |v: &Point2| nx * v.x + ny * v.y - c;
        let mut out = Vec::with_capacity(poly.len() + 1);
        for k in 0..poly.len() {
            let (a, src) = poly[k];
            let b = poly[(k + 1) % poly.len()].0;
            let (sa, sb) = (side(&a), side(&b));
            let cut = || {
                let t = sa / (sa - sb);
                Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
            };
            match (sa <= 0.0, sb <= 0.0) {
                (true, true) => out.push((a, src)),
                (true, false) => {
                    out.push((a, src));
                    out.push((cut(), Some(j)));
                }
                (false, true) => out.push((cut(), src)),
                (false, false) => {}
            }
        }
        poly = out;
    }
    poly
}

pub fn shoelace(poly: &[Point2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            a.x * b.y - a.y * b.x
        })
        .sum::<f64>()
        .abs()
}

/// Shared boundary lengths `(i, j, length)` with `i < j`, from the clipped
/// cells; each facet is measured from both sides and averaged.
pub fn facet_lengths(points: &[Point2]) -> Vec<(usize, usize, f64)> {
    let mut acc = std::collections::BTreeMap::new();
    for i in 0..points.len() {
        let cell = clipped_cell(points, i);
        for k in 0..cell.len() {
            if let (a, Some(j)) = cell[k] {
                let b = cell[(k + 1) % cell.len()].0;
                let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
                *acc.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * len;
            }
        }
    }
    acc.into_iter().map(|((i, j), l)| (i, j, l)).collect()
}

pub struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }

    pub fn count(&mut self) -> usize {
        (0..self.0.len()).filter(|&a| self.find(a) == a).count()
    }
}

pub fn is_connected(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> bool {
    let mut adj = vec![Vec::new(); n];
    for (i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut reached = 1;
    while let Some(a) = stack.pop() {
        for &b in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                reached += 1;
                stack.push(b);
            }
        }
    }
    reached == n
}

/// `1/2 |y - theta|^2 + lambda sum w |theta_i - theta_j|`.
pub fn primal_objective(
    edges: &[(usize, usize, f64)],
    y: &[f64],
    lambda: f64,
    theta: &[f64],
) -> f64 {
    let fit: f64 = y.iter().zip(theta).map(|(a, b)| (a - b).powi(2)).sum();
    let tv: f64 = edges
        .iter()
        .map(|&(i, j, w)| w * (theta[i] - theta[j]).abs())
        .sum();
    0.5 * fit + lambda * tv
}

/// Accelerated projected gradient on the dual
/// `max_{|u_e| <= lambda w_e} 1/2 |y|^2 - 1/2 |y - D^T u|^2`.
/// Returns the primal point `y - D^T u` and the dual value, a lower bound on
/// the optimum.
pub fn dual_fista(
    n: usize,
    edges: &[(usize, usize, f64)],
    y: &[f64],
    lambda: f64,
    iters: usize,
) -> (Vec<f64>, f64) {
    let mut deg = vec![0usize; n];
    for &(i, j, _) in edges {
        deg[i] += 1;
        deg[j] += 1;
    }
    // |D|^2 <= 2 max degree
    let step = 1.0 / (2.0 * deg.iter().copied().max().unwrap_or(1).max(1) as f64);
    let bound: Vec<f64> = edges.iter().map(|e| lambda * e.2).collect();
    let m = edges.len();
    let primal = |u: &[f64]| {
        let mut r = y.to_vec();
        for (e, &(i, j, _)) in edges.iter().enumerate() {
            r[i] -= u[e];
            r[j] += u[e];
        }
        r
    };
    let (mut u, mut v) = (vec![0.0; m], vec![0.0; m]);
    let mut t = 1.0f64;
    for _ in 0..iters {
        let r = primal(&v);
        let mut next = vec![0.0; m];
        for (e, &(i, j, _)) in edges.iter().enumerate() {
            // ascent direction: D r
            next[e] = (v[e] + step * (r[i] - r[j])).clamp(-bound[e], bound[e]);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for e in 0..m {
            v[e] = next[e] + beta * (next[e] - u[e]);
        }
        u = next;
        t = t_next;
    }
    let theta = primal(&u);
    let yy: f64 = y.iter().map(|a| a * a).sum();
    let rr: f64 = theta.iter().map(|a| a * a).sum();
    (theta, 0.5 * yy - 0.5 * rr)
}

/// Area of the disk `|x - c| <= r` intersected with `[lo, hi]`, in closed form.
pub fn disk_box_area(c: Point2, r: f64, lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let corner = |x: f64, y: f64| quadrant_area(x - c.x, y - c.y, r);
    corner(hi[0], hi[1]) - corner(lo[0], hi[1]) - corner(hi[0], lo[1]) + corner(lo[0], lo[1])
}

/// Area of the centered disk of radius `r` within `{u <= x, v <= y}`.
fn quadrant_area(x: f64, y: f64, r: f64) -> f64 {
    // int h(u) du with h = sqrt(r^2 - u^2)
    let big_h = |u: f64| {
        let u = u.clamp(-r, r);
        0.5 * (u * (r * r - u * u).max(0.0).sqrt() + r * r * (u / r).asin())
    };
    let x = x.clamp(-r, r);
    let piece = |a: f64, b: f64, f: &dyn Fn(f64, f64) -> f64| if b > a { f(a, b) } else { 0.0 };
    let full = |a: f64, b: f64| 2.0 * (big_h(b) - big_h(a));
    if y >= r {
        return piece(-r, x, &full);
    }
    if y <= -r {
        return 0.0;
    }
    let s = (r * r - y * y).sqrt();
    let partial = |a: f64, b: f64| y * (b - a) + big_h(b) - big_h(a);
    let middle = piece(-s, x.min(s), &partial);
    let sides = if y > 0.0 {
        piece(-r, x.min(-s), &full) + piece(s, x, &full)
    } else {
        0.0
    };
    middle + sides
}

/// Length of the set where `label` changes inside the unit square, by the
/// Crofton formula: `dirs` equally spaced directions, parallel lines
/// `line_gap` apart, `label` sampled every `step` along each line.
pub fn crofton_length<L: Fn(Point2) -> u8>(label: L, dirs: usize, line_gap: f64, step: f64) -> f64 {
    let inside = |x: f64, y: f64| (0.0..1.0).contains(&x) && (0.0..1.0).contains(&y);
    let corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    let range = |a: f64, b: f64| {
        corners
            .iter()
            .map(|c| a * c.0 + b * c.1)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    };
    let mut total = 0.0;
    for k in 0..dirs {
        let ang = (k as f64 + 0.5) * PI / dirs as f64;
        let (dx, dy) = (ang.cos(), ang.sin());
        let (nx, ny) = (-dy, dx);
        let (s_lo, s_hi) = range(nx, ny);
        let (t_lo, t_hi) = range(dx, dy);
        let steps = ((t_hi - t_lo) / step).ceil() as usize;
        let mut crossings = 0usize;
        let mut s = s_lo + 0.5 * line_gap;
        while s < s_hi {
            let mut prev: Option<u8> = None;
            for q in 0..=steps {
                let t = t_lo + q as f64 * step;
                let (x, y) = (s * nx + t * dx, s * ny + t * dy);
                let cur = inside(x, y).then(|| label(Point2::new(x, y)));
                if let (Some(a), Some(b)) = (prev, cur) {
                    crossings += usize::from(a != b);
                }
                prev = cur;
            }
            s += line_gap;
        }
        total += crossings as f64 * line_gap;
    }
    0.5 * total * PI / dirs as f64
}
