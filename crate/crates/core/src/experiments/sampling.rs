use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{DensityDescriptor, TruthDescriptor};
use crate::error::{Error, Result};
use crate::estimators::RegressionDataset;
use crate::geometry::Point2;
use crate::quadrature::integrate;

/// Center of the truth ball and of the sampling annulus.
pub const CENTER: Point2 = Point2 { x: 0.5, y: 0.5 };
/// Radius of the truth ball `f0 = 1{B(CENTER, BALL_RADIUS)}`.
pub const BALL_RADIUS: f64 = 0.25;
pub const ANNULUS_INNER: f64 = BALL_RADIUS - 0.1;
pub const ANNULUS_OUTER: f64 = BALL_RADIUS + 0.1;

/// Design densities on the unit square: uniform, or piecewise constant with
/// a different level on the annulus around the truth boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingModel {
    Uniform,
    LowTube,
    HighTube,
}

impl SamplingModel {
    pub const ALL: [SamplingModel; 3] = [Self::Uniform, Self::LowTube, Self::HighTube];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::LowTube => "lowtube",
            Self::HighTube => "hightube",
        }
    }

    /// Density on the closed annulus.
    pub fn inside_density(self) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::LowTube => 0.295,
            Self::HighTube => 1.2,
        }
    }

    /// Density off the annulus, fixed by total mass 1.
    pub fn outside_density(self) -> f64 {
        let a = annulus_area();
        (1.0 - self.inside_density() * a) / (1.0 - a)
    }

    /// Probability mass of the annulus.
    pub fn annulus_mass(self) -> f64 {
        self.inside_density() * annulus_area()
    }

    pub fn density_at(self, p: Point2) -> f64 {
        if in_annulus(p) {
            self.inside_density()
        } else {
            self.outside_density()
        }
    }

    pub fn density_descriptor(self) -> DensityDescriptor {
        match self {
            Self::Uniform => DensityDescriptor::Uniform,
            _ => DensityDescriptor::Annulus {
                center: vec![CENTER.x, CENTER.y],
                r_inner: ANNULUS_INNER,
                r_outer: ANNULUS_OUTER,
                inside: self.inside_density(),
                outside: self.outside_density(),
            },
        }
    }

    /// `P(X in B(CENTER, BALL_RADIUS))`: the inner disk carries the outside
    /// density, the rest of the ball lies in the annulus.
    pub fn ball_probability(self) -> f64 {
        let inner = PI * ANNULUS_INNER * ANNULUS_INNER;
        let shell = PI * (BALL_RADIUS * BALL_RADIUS - ANNULUS_INNER * ANNULUS_INNER);
        self.outside_density() * inner + self.inside_density() * shell
    }

    /// One draw: choose the region by its mass, then sample uniformly in it.
    pub fn sample_point<R: Rng + ?Sized>(self, rng: &mut R) -> Point2 {
        if rng.random::<f64>() < self.annulus_mass() {
            loop {
                let u: f64 = rng.random();
                let r2 = ANNULUS_INNER * ANNULUS_INNER
                    + u * (ANNULUS_OUTER * ANNULUS_OUTER - ANNULUS_INNER * ANNULUS_INNER);
                let phi = 2.0 * PI * rng.random::<f64>();
                let r = r2.sqrt();
                let p = Point2::new(CENTER.x + r * phi.cos(), CENTER.y + r * phi.sin());
                // rounding can nudge a point off the closed shell
                if in_annulus(p) {
                    return p;
                }
            }
        }
        loop {
            let p = Point2::new(open_unit(rng), open_unit(rng));
            if !in_annulus(p) {
                return p;
            }
        }
    }

    pub fn truth_descriptor() -> TruthDescriptor {
        TruthDescriptor::IndicatorBall {
            center: vec![CENTER.x, CENTER.y],
            radius: BALL_RADIUS,
        }
    }
}

impl fmt::Display for SamplingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "uniform" => Ok(Self::Uniform),
            "lowtube" => Ok(Self::LowTube),
            "hightube" => Ok(Self::HighTube),
            _ => Err(Error::InvalidParameter(format!(
                "unknown sampling model {s:?} (expected uniform, lowtube or hightube)"
            ))),
        }
    }
}

pub fn annulus_area() -> f64 {
    PI * (ANNULUS_OUTER * ANNULUS_OUTER - ANNULUS_INNER * ANNULUS_INNER)
}

fn in_annulus(p: Point2) -> bool {
    (ANNULUS_INNER..=ANNULUS_OUTER).contains(&p.dist(&CENTER))
}

/// Uniform on the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// `n` i.i.d. design points from `model` with a generator seeded by `seed`.
pub fn sample_design(model: SamplingModel, n: usize, seed: u64) -> Vec<Point2> {
    sample_design_with(model, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_design_with<R: Rng + ?Sized>(
    model: SamplingModel,
    n: usize,
    rng: &mut R,
) -> Vec<Point2> {
    (0..n).map(|_| model.sample_point(rng)).collect()
}

/// A design from `model` with responses `f0(x_i) + sigma z_i`, `sigma` set
/// by `snr`. Points and noise come from one generator seeded by `seed`, so
/// the points equal `sample_design(model, n, seed)`.
pub fn simulate_dataset(
    model: SamplingModel,
    n: usize,
    snr: f64,
    seed: u64,
) -> Result<RegressionDataset> {
    let sigma = noise_sigma(model, snr)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = sample_design_with(model, n, &mut rng);
    let truth: Vec<f64> = points.iter().map(|&p| f0_indicator_ball(p)).collect();
    let y = truth
        .iter()
        .map(|t| {
            let z: f64 = StandardNormal.sample(&mut rng);
            t + sigma * z
        })
        .collect();
    RegressionDataset::new(points, y)?
        .with_sigma(sigma)
        .with_truth(truth)
}

/// The closed ball indicator.
pub fn f0_indicator_ball(x: Point2) -> f64 {
    if x.dist(&CENTER) <= BALL_RADIUS {
        1.0
    } else {
        0.0
    }
}

/// Noise level giving `Var(f0(X)) / sigma^2 = snr` under `model`.
pub fn noise_sigma(model: SamplingModel, snr: f64) -> Result<f64> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "snr must be positive, got {snr}"
        )));
    }
    let p = model.ball_probability();
    Ok((p * (1.0 - p) / snr).sqrt())
}

/// `int_{[lo, hi]} f0` by quadrature over `x` of the chord length.
pub fn ball_box_integral(lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let a = lo[0].max(CENTER.x - BALL_RADIUS);
    let b = hi[0].min(CENTER.x + BALL_RADIUS);
    if a >= b {
        return 0.0;
    }
    let chord = |x: f64| {
        let h = (BALL_RADIUS * BALL_RADIUS - (x - CENTER.x).powi(2))
            .max(0.0)
            .sqrt();
        ((CENTER.y + h).min(hi[1]) - (CENTER.y - h).max(lo[1])).max(0.0)
    };
    // the chord has kinks where the circle crosses the box's horizontal sides
    let mut breaks = vec![a, b];
    for y in [lo[1], hi[1]] {
        let dy = y - CENTER.y;
        if dy.abs() < BALL_RADIUS {
            let h = (BALL_RADIUS * BALL_RADIUS - dy * dy).sqrt();
            breaks.extend(
                [CENTER.x - h, CENTER.x + h]
                    .into_iter()
                    .filter(|&x| x > a && x < b),
            );
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks
        .windows(2)
        .map(|w| integrate(chord, w[0], w[1], 1e-15, 1e-13).value)
        .sum()
}
