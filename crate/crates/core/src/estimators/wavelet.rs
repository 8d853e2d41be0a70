//! Tensor Haar wavelets on `(0, 1]^D` and the hard-thresholding estimator.
//!
//! `phi = 1{(0, 1]}`, `psi = 1{(0, 1/2]} - 1{(1/2, 1]}`. For an orientation
//! `i in {0,1}^D \ {0}` (stored as a bitmask) the mother wavelet is
//! `Psi^i(x) = prod_k (i_k ? psi : phi)(x_k)` and
//! `Psi^i_{lk}(x) = 2^(lD/2) Psi^i(2^l x - k)` for cells `k in [2^l]^D`.

use std::collections::BTreeMap;

use crate::error::{check_len, Error, Result};

pub fn haar_phi(x: f64) -> f64 {
    if x > 0.0 && x <= 1.0 {
        1.0
    } else {
        0.0
    }
}

pub fn haar_psi(x: f64) -> f64 {
    if x > 0.0 && x <= 0.5 {
        1.0
    } else if x > 0.5 && x <= 1.0 {
        -1.0
    } else {
        0.0
    }
}

/// `Psi^orientation_{level, cell}(x)`.
pub fn haar_basis<const D: usize>(
    level: u32,
    cell: [usize; D],
    orientation: u32,
    x: &[f64; D],
) -> f64 {
    let scale = (1u64 << level) as f64;
    let mut v = scale.powf(D as f64 / 2.0);
    for k in 0..D {
        let u = scale * x[k] - cell[k] as f64;
        v *= if orientation >> k & 1 == 1 {
            haar_psi(u)
        } else {
            haar_phi(u)
        };
        if v == 0.0 {
            return 0.0;
        }
    }
    v
}

/// Dyadic cell at `level` containing `x`, using the half-open `(a, b]`
/// convention.
pub fn dyadic_cell<const D: usize>(level: u32, x: &[f64; D]) -> [usize; D] {
    let scale = (1u64 << level) as f64;
    let top = (1usize << level) - 1;
    let mut cell = [0usize; D];
    for k in 0..D {
        cell[k] = ((scale * x[k]).ceil() - 1.0).clamp(0.0, top as f64) as usize;
    }
    cell
}

/// Child of `cell` containing `x`: bit `k` set when `x_k` lies in the upper
/// half along axis `k`, where `psi = -1`.
fn child_index<const D: usize>(level: u32, cell: &[usize; D], x: &[f64; D]) -> usize {
    let scale = (1u64 << level) as f64;
    (0..D).fold(0, |acc, k| {
        let u = scale * x[k] - cell[k] as f64;
        acc | (usize::from(u > 0.5) << k)
    })
}

/// `prod_{k in orientation} psi-sign` for a child.
fn child_sign(child: usize, orientation: u32) -> f64 {
    if (child as u32 & orientation).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletCoefficient<const D: usize> {
    pub level: u32,
    pub cell: [usize; D],
    pub orientation: u32,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct WaveletFit<const D: usize> {
    pub ybar: f64,
    /// Kept coefficients sorted by `(level, cell, orientation)`.
    pub coefficients: Vec<WaveletCoefficient<D>>,
    pub threshold: f64,
    pub max_level: u32,
    lookup: BTreeMap<(u32, [usize; D]), Vec<(u32, f64)>>,
}

impl<const D: usize> WaveletFit<D> {
    fn from_parts(
        ybar: f64,
        coefficients: Vec<WaveletCoefficient<D>>,
        threshold: f64,
        max_level: u32,
    ) -> Self {
        let mut lookup: BTreeMap<(u32, [usize; D]), Vec<(u32, f64)>> = BTreeMap::new();
        for c in &coefficients {
            lookup
                .entry((c.level, c.cell))
                .or_default()
                .push((c.orientation, c.value));
        }
        Self {
            ybar,
            coefficients,
            threshold,
            max_level,
            lookup,
        }
    }

    /// Synthesizes `c0 + sum theta Psi` from explicit coefficients.
    pub fn synthesize(c0: f64, coefficients: Vec<WaveletCoefficient<D>>) -> Self {
        let max_level = coefficients.iter().map(|c| c.level).max().unwrap_or(0);
        let mut coefficients = coefficients;
        coefficients.sort_by(|a, b| {
            (a.level, a.cell, a.orientation).cmp(&(b.level, b.cell, b.orientation))
        });
        Self::from_parts(c0, coefficients, 0.0, max_level)
    }

    pub fn evaluate(&self, x: &[f64; D]) -> f64 {
        let mut v = self.ybar;
        for level in 0..=self.max_level {
            let cell = dyadic_cell(level, x);
            if let Some(list) = self.lookup.get(&(level, cell)) {
                for &(orientation, value) in list {
                    v += value * haar_basis(level, cell, orientation, x);
                }
            }
        }
        v
    }

    /// `{"ybar", "threshold", "max_level", "coefficients": [[level, [cell], orientation, value], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let coefs: Vec<serde_json::Value> = self
            .coefficients
            .iter()
            .map(|c| serde_json::json!([c.level, c.cell.to_vec(), c.orientation, c.value]))
            .collect();
        serde_json::json!({
            "ybar": self.ybar,
            "threshold": self.threshold,
            "max_level": self.max_level,
            "coefficients": coefs,
        })
    }
}

/// `8 n^(-1/2) ln(2n / delta)^(3/2)`.
pub fn wavelet_threshold(n: usize, delta: f64) -> f64 {
    let nf = n as f64;
    8.0 / nf.sqrt() * (2.0 * nf / delta).ln().powf(1.5)
}

/// Truncation level `floor(log2(n) / D)`, i.e. the largest `l` with
/// `2^(lD) <= n`.
pub fn truncation_level(n: usize, d: usize) -> u32 {
    let mut level = 0u32;
    while ((level as usize + 1) * d) < usize::BITS as usize
        && (1usize << ((level as usize + 1) * d)) <= n
    {
        level += 1;
    }
    level
}

/// Hard-thresholded Haar fit with the theoretical threshold and truncation
/// level for a uniform design.
pub fn fit_wavelet<const D: usize>(
    points: &[[f64; D]],
    y: &[f64],
    delta: f64,
) -> Result<WaveletFit<D>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let n = points.len();
    fit_wavelet_with(
        points,
        y,
        wavelet_threshold(n, delta),
        truncation_level(n, D),
    )
}

/// Keeps every empirical coefficient `(1/n) sum_j y_j Psi(x_j)` up to
/// `max_level` whose magnitude is at least `threshold`.
pub fn fit_wavelet_with<const D: usize>(
    points: &[[f64; D]],
    y: &[f64],
    threshold: f64,
    max_level: u32,
) -> Result<WaveletFit<D>> {
    check_len(points.len(), y.len())?;
    if points.is_empty() {
        return Err(Error::DegenerateInput("no design points".into()));
    }
    if D == 0 || D > 16 {
        return Err(Error::InvalidParameter(format!(
            "unsupported dimension {D}"
        )));
    }
    let n = points.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let children = 1usize << D;
    let mut coefficients = Vec::new();
    for level in 0..=max_level {
        let mut sums: BTreeMap<[usize; D], Vec<f64>> = BTreeMap::new();
        for (x, &v) in points.iter().zip(y) {
            let cell = dyadic_cell(level, x);
            let child = child_index(level, &cell, x);
            sums.entry(cell).or_insert_with(|| vec![0.0; children])[child] += v;
        }
        let scale = ((1u64 << level) as f64).powf(D as f64 / 2.0) / n;
        for (cell, s) in sums {
            for orientation in 1..children as u32 {
                let value = scale
                    * s.iter()
                        .enumerate()
                        .map(|(c, v)| child_sign(c, orientation) * v)
                        .sum::<f64>();
                if value.abs() >= threshold {
                    coefficients.push(WaveletCoefficient {
                        level,
                        cell,
                        orientation,
                        value,
                    });
                }
            }
        }
    }
    Ok(WaveletFit::from_parts(
        ybar,
        coefficients,
        threshold,
        max_level,
    ))
}

/// Population coefficients `int f Psi^i_{lk}` at one level, given a routine
/// that integrates `f` over the box `[lo, hi]`.
pub fn population_coefficients<const D: usize, F>(
    level: u32,
    mut box_integral: F,
) -> Vec<WaveletCoefficient<D>>
where
    F: FnMut(&[f64; D], &[f64; D]) -> f64,
{
    let side = 1usize << level;
    let h = 1.0 / side as f64;
    let children = 1usize << D;
    let scale = (side as f64).powf(D as f64 / 2.0);
    let mut out = Vec::new();
    let total = side.pow(D as u32);
    for flat in 0..total {
        let mut cell = [0usize; D];
        let mut r = flat;
        for k in (0..D).rev() {
            cell[k] = r % side;
            r /= side;
        }
        let child_integrals: Vec<f64> = (0..children)
            .map(|c| {
                let mut lo = [0.0; D];
                let mut hi = [0.0; D];
                for k in 0..D {
                    let base = cell[k] as f64 * h + if c >> k & 1 == 1 { 0.5 * h } else { 0.0 };
                    lo[k] = base;
                    hi[k] = base + 0.5 * h;
                }
                box_integral(&lo, &hi)
            })
            .collect();
        for orientation in 1..children as u32 {
            let value = scale
                * child_integrals
                    .iter()
                    .enumerate()
                    .map(|(c, v)| child_sign(c, orientation) * v)
                    .sum::<f64>();
            out.push(WaveletCoefficient {
                level,
                cell,
                orientation,
                value,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mother_wavelet_values() {
        assert_eq!(haar_psi(0.3), 1.0);
        assert_eq!(haar_psi(0.7), -1.0);
        assert_eq!(haar_psi(0.5), 1.0);
        assert_eq!(haar_psi(1.0), -1.0);
        assert_eq!(haar_psi(0.0), 0.0);
        assert_eq!(haar_phi(1.0), 1.0);
        assert_eq!(haar_phi(0.0), 0.0);
    }

    #[test]
    fn threshold_and_levels() {
        assert_eq!(truncation_level(1024, 2), 5);
        assert_eq!(truncation_level(1023, 2), 4);
        assert_eq!(truncation_level(1274, 2), 5);
        assert_eq!(truncation_level(8, 3), 1);
        let l = wavelet_threshold(1024, 0.1);
        assert!((l - 8.0 / 32.0 * 20480f64.ln().powf(1.5)).abs() < 1e-12);
        assert!((l - 7.82).abs() < 0.01);
    }

    #[test]
    fn cells_use_half_open_convention() {
        assert_eq!(dyadic_cell(1, &[0.5, 0.51]), [0, 1]);
        assert_eq!(dyadic_cell(2, &[1.0, 0.25]), [3, 0]);
    }

    #[test]
    fn zero_threshold_reproduces_cell_means() {
        // with all coefficients kept to level L the fit is the average of y
        // over each level-(L+1) cell
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<[f64; 2]> = (0..500).map(|_| [rng.random(), rng.random()]).collect();
        let y: Vec<f64> = (0..500).map(|_| rng.random()).collect();
        let fit = fit_wavelet_with(&pts, &y, 0.0, 1).unwrap();
        let mut sums: BTreeMap<[usize; 2], (f64, usize)> = BTreeMap::new();
        for (p, v) in pts.iter().zip(&y) {
            let e = sums.entry(dyadic_cell(2, p)).or_default();
            e.0 += v;
            e.1 += 1;
        }
        // uniform design: empirical coefficients use 1/n, so the fit equals
        // (count * 16 / n) * cell mean
        for (p, _) in pts.iter().zip(&y) {
            let (s, _) = sums[&dyadic_cell(2, p)];
            let expected = s * 16.0 / 500.0;
            assert!((fit.evaluate(p) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn kept_coefficients_exceed_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 2]> = (0..1024).map(|_| [rng.random(), rng.random()]).collect();
        let y: Vec<f64> = pts
            .iter()
            .map(|p| f64::from(u8::from(p[0] < 0.5)) * 3.0)
            .collect();
        let fit = fit_wavelet_with(&pts, &y, 0.2, 5).unwrap();
        assert!(!fit.coefficients.is_empty());
        assert!(fit
            .coefficients
            .iter()
            .all(|c| c.value.abs() >= 0.2 && c.level <= 5));
        let theory = fit_wavelet(&pts, &y, 0.1).unwrap();
        assert_eq!(theory.max_level, 5);
        assert!(theory.coefficients.is_empty());
        assert_eq!(
            theory.to_json()["coefficients"].as_array().unwrap().len(),
            0
        );
    }
}
