//! Limit constants for discrete TV on geometric graphs.
//!
//! For `f` smooth (or an indicator with a smooth boundary) and `n -> inf`:
//!
//! * Voronoi weights: `DTV -> c_d * TV(f)`, independent of the design density;
//! * eps-graph: `DTV / (n^2 eps^(d+1)) -> (sigma_K / 2) * int |grad f| p^2`
//!   with `K = 1{t <= 1}`, the factor `1/2` coming from unordered pairs;
//! * kNN: same shape with `p^(1 - 1/d)` and a constant that has no known
//!   closed form, so predictions need a caller-supplied constant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, Estimate};

/// Integrands are cut off where they drop below this value.
const NEGLIGIBLE: f64 = 1e-18;

/// `H^m` measure of the unit sphere in `R^(m+1)`.
pub fn unit_sphere_measure(m: usize) -> f64 {
    let a = (m as f64 + 1.0) / 2.0;
    2.0 * PI.powf(a) / libm::tgamma(a)
}

/// Lebesgue measure of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / libm::tgamma(h + 1.0)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be >= 2, got {d}"
        )));
    }
    Ok(())
}

/// Smallest `r` in `1, 2, 4, ...` past the peak of `r^p exp(-omega (r/c)^d)`
/// where that bound is below `NEGLIGIBLE`.
fn tail_radius(p: f64, omega: f64, c: f64, d: f64) -> f64 {
    let bound = |r: f64| r.powf(p) * (-omega * (r / c).powf(d)).exp();
    let past_peak = |r: f64| omega * d * (r / c).powf(d) > p;
    let mut r = 1.0;
    while !(past_peak(r) && bound(r) < NEGLIGIBLE) {
        r *= 2.0;
    }
    r
}

/// `K_Vor(t) = int_0^inf exp(-omega_d (t^2/4 + s^2)^(d/2)) s^(d-2) ds` with its
/// quadrature error.
pub fn voronoi_kernel_estimate(t: f64, d: usize) -> Estimate {
    let omega = unit_ball_volume(d);
    let df = d as f64;
    let s_max = tail_radius(df - 2.0, omega, 1.0, df);
    let q = 0.25 * t * t;
    integrate(
        |s| (-omega * (q + s * s).powf(0.5 * df)).exp() * s.powi(d as i32 - 2),
        0.0,
        s_max,
        0.0,
        1e-13,
    )
}

/// The Voronoi kernel `K_Vor(t)` in dimension `d >= 2`.
pub fn voronoi_kernel(t: f64, d: usize) -> f64 {
    voronoi_kernel_estimate(t, d).value
}

/// `c_d = eta_{d-2}^2 / (d-1) * int int t^d s^(d-2) exp(-omega_d (t^2/4 + s^2)^(d/2)) dt ds`,
/// integrating over `t` first on a truncated box.
pub fn c_d(d: usize) -> Result<Estimate> {
    check_dim(d)?;
    let omega = unit_ball_volume(d);
    let df = d as f64;
    let t_max = tail_radius(df, omega, 2.0, df);
    let s_max = tail_radius(df - 2.0, omega, 1.0, df);
    let mut inner_rel: f64 = 0.0;
    let outer = integrate(
        |s| {
            let s2 = s * s;
            let inner = integrate(
                |t| t.powi(d as i32) * (-omega * (0.25 * t * t + s2).powf(0.5 * df)).exp(),
                0.0,
                t_max,
                0.0,
                1e-14,
            );
            inner_rel = inner_rel.max(inner.relative_error());
            s.powi(d as i32 - 2) * inner.value
        },
        0.0,
        s_max,
        0.0,
        1e-13,
    );
    let eta = unit_sphere_measure(d - 2);
    let scale = eta * eta / (df - 1.0);
    let value = scale * outer.value;
    Ok(Estimate {
        value,
        error: scale * outer.error + value.abs() * inner_rel,
    })
}

/// `c_d` through the surface-tension map: `c_d = sigma_K / 2` with
/// `K = eta_{d-2} K_Vor`. Shares no code path with [`c_d`] beyond the basic
/// quadrature rule.
pub fn c_d_via_kernel(d: usize) -> Result<Estimate> {
    check_dim(d)?;
    let eta = unit_sphere_measure(d - 2);
    let mut inner_err: f64 = 0.0;
    let sigma = sigma_k(
        |t| {
            let k = voronoi_kernel_estimate(t, d);
            inner_err = inner_err.max(k.relative_error());
            eta * k.value
        },
        d,
    )?;
    Ok(Estimate {
        value: 0.5 * sigma.value,
        error: 0.5 * sigma.error + 0.5 * sigma.value.abs() * inner_err,
    })
}

/// `sigma_K = 2 eta_{d-2} / (d-1) * int_0^inf K(t) t^d dt`.
pub fn sigma_k<K: FnMut(f64) -> f64>(mut kernel: K, d: usize) -> Result<Estimate> {
    check_dim(d)?;
    let scale = 2.0 * unit_sphere_measure(d - 2) / (d as f64 - 1.0);
    let integral = integrate_to_infinity(|t| kernel(t) * t.powi(d as i32), 0.0, 1e-300, 1e-13)?;
    Ok(Estimate {
        value: scale * integral.value,
        error: scale * integral.error,
    })
}

/// eps-graph constant `sigma_K / 2` for the indicator kernel `1{t <= 1}`.
pub fn sigma_eps(d: usize) -> Result<Estimate> {
    let s = sigma_k(|t| if t <= 1.0 { 1.0 } else { 0.0 }, d)?;
    Ok(Estimate {
        value: 0.5 * s.value,
        error: 0.5 * s.error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub d: usize,
    /// `H^{d-2}` measure of the unit `(d-2)`-sphere.
    #[serde(rename = "eta")]
    pub eta_dm2: f64,
    /// Volume of the unit `d`-ball.
    #[serde(rename = "leb")]
    pub leb_d: f64,
    pub c_d: f64,
    pub c_d_error: f64,
    pub sigma_eps: f64,
    pub sigma_eps_error: f64,
}

pub fn limit_constants(d: usize) -> Result<LimitConstants> {
    check_dim(d)?;
    let c = c_d(d)?;
    let s = sigma_eps(d)?;
    Ok(LimitConstants {
        d,
        eta_dm2: unit_sphere_measure(d - 2),
        leb_d: unit_ball_volume(d),
        c_d: c.value,
        c_d_error: c.error,
        sigma_eps: s.value,
        sigma_eps_error: s.error,
    })
}

/// Graph whose TV limit is predicted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitGraph {
    Voronoi,
    Epsilon,
    /// The kNN limit constant must be supplied; there is no closed form.
    Knn {
        constant: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthDescriptor {
    IndicatorBall { center: Vec<f64>, radius: f64 },
}

/// Piecewise-constant design densities on the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityDescriptor {
    Uniform,
    /// `inside` on the closed shell `r_inner <= |x - center| <= r_outer`,
    /// `outside` elsewhere.
    Annulus {
        center: Vec<f64>,
        r_inner: f64,
        r_outer: f64,
        inside: f64,
        outside: f64,
    },
}

impl DensityDescriptor {
    pub fn density_at(&self, x: &[f64]) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::Annulus {
                center,
                r_inner,
                r_outer,
                inside,
                outside,
            } => {
                let r = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    .sqrt();
                if (*r_inner..=*r_outer).contains(&r) {
                    *inside
                } else {
                    *outside
                }
            }
        }
    }
}

/// `int_{boundary of B} g(p) dH^{d-1}` for the ball `B`.
fn boundary_integral<G: Fn(f64) -> f64>(
    center: &[f64],
    radius: f64,
    density: &DensityDescriptor,
    d: usize,
    g: G,
) -> Result<f64> {
    let area = unit_sphere_measure(d - 1) * radius.powi(d as i32 - 1);
    match density {
        DensityDescriptor::Uniform => Ok(g(1.0) * area),
        DensityDescriptor::Annulus { center: ac, .. } if ac.as_slice() == center => {
            let mut x = center.to_vec();
            x[0] += radius;
            Ok(g(density.density_at(&x)) * area)
        }
        DensityDescriptor::Annulus { center: ac, .. } if d == 2 && ac.len() == 2 => {
            let e = integrate(
                |phi: f64| {
                    let x = [
                        center[0] + radius * phi.cos(),
                        center[1] + radius * phi.sin(),
                    ];
                    g(density.density_at(&x))
                },
                0.0,
                2.0 * PI,
                1e-12,
                1e-12,
            );
            Ok(e.value * radius)
        }
        _ => Err(Error::UnsupportedDescriptor(
            "non-concentric annulus density is only supported for d = 2".into(),
        )),
    }
}

/// Predicted limit of the suitably rescaled DTV of `f0` at the design points.
///
/// Voronoi: `c_d * perimeter`. Epsilon: limit of `DTV / (n^2 eps^(d+1))`.
/// Knn: limit of `DTV / (n^2 eps_bar^(d+1))` given the caller's constant.
pub fn limit_prediction(
    graph: LimitGraph,
    truth: &TruthDescriptor,
    density: &DensityDescriptor,
    d: usize,
) -> Result<f64> {
    check_dim(d)?;
    let TruthDescriptor::IndicatorBall { center, radius } = truth;
    if center.len() != d || !(*radius > 0.0) {
        return Err(Error::UnsupportedDescriptor(format!(
            "ball needs a {d}-dimensional center and positive radius"
        )));
    }
    if center
        .iter()
        .any(|c| c - radius <= 0.0 || c + radius >= 1.0)
    {
        return Err(Error::UnsupportedDescriptor(
            "ball must lie inside the open unit cube".into(),
        ));
    }
    if let DensityDescriptor::Annulus {
        center: ac,
        r_inner,
        r_outer,
        inside,
        outside,
    } = density
    {
        if ac.len() != d
            || !(0.0 <= *r_inner && r_inner < r_outer && *inside > 0.0 && *outside > 0.0)
        {
            return Err(Error::UnsupportedDescriptor(
                "malformed annulus density".into(),
            ));
        }
    }
    match graph {
        LimitGraph::Voronoi => {
            Ok(c_d(d)?.value * unit_sphere_measure(d - 1) * radius.powi(d as i32 - 1))
        }
        LimitGraph::Epsilon => {
            let s = sigma_eps(d)?.value;
            Ok(s * boundary_integral(center, *radius, density, d, |p| p * p)?)
        }
        LimitGraph::Knn { constant: Some(c) } => {
            let e = 1.0 - 1.0 / d as f64;
            Ok(c * boundary_integral(center, *radius, density, d, |p| p.powf(e))?)
        }
        LimitGraph::Knn { constant: None } => Err(Error::UnsupportedDescriptor(
            "the kNN limit constant has no closed form; supply one".into(),
        )),
    }
}
