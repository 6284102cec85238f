//! Mono-exponential Bloch fits by variable projection: amplitudes are solved
//! linearly for each trial time constant, which is searched on a log grid
//! and then refined by golden-section search.

use super::curve::DecayCurve;
use crate::error::{Error, Result};

/// M_z(t) = a0 + a1 (1 - 2 exp(-t/t1)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochLongitudinal {
    pub a0: f64,
    pub a1: f64,
    pub t1: f64,
    pub residual_norm: f64,
}

impl BlochLongitudinal {
    pub fn value(&self, t: f64) -> f64 {
        self.a0 + self.a1 * (1.0 - 2.0 * (-t / self.t1).exp())
    }
}

/// M_x(t) = a1 exp(-t/t2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochTransverse {
    pub a1: f64,
    pub t2: f64,
    pub residual_norm: f64,
}

impl BlochTransverse {
    pub fn value(&self, t: f64) -> f64 {
        self.a1 * (-t / self.t2).exp()
    }
}

const GRID_POINTS: usize = 400;

/// Weighted linear least squares over the given basis columns.
fn linear_fit(basis: &[Vec<f64>], y: &[f64], w: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = basis.len();
    let n = y.len();
    let a = nalgebra::DMatrix::from_fn(n, k, |i, j| basis[j][i] * w[i]);
    let b = nalgebra::DVector::from_iterator(n, y.iter().zip(w).map(|(y, w)| y * w));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-8 * smax {
        return None;
    }
    let x = svd.solve(&b, 0.0).ok()?;
    let r = (&a * &x - &b).norm_squared();
    Some((x.iter().copied().collect(), r))
}

/// The first grid point within round-off of the minimum is taken, so flat
/// or step-like profiles land on the range edge and are rejected.
fn search<F>(curve: &DecayCurve, profile: F) -> Result<(f64, Vec<f64>, f64)>
where
    F: Fn(f64) -> Option<(Vec<f64>, f64)>,
{
    let t = curve.times();
    let span = t[t.len() - 1] - t[0];
    let step = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let (lo, hi) = ((step / 100.0).ln(), (span * 100.0).ln());
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).collect();
    let cost = |u: f64| profile(u.exp()).map(|(_, r)| r).unwrap_or(f64::INFINITY);
    let values: Vec<f64> = grid.iter().map(|u| cost(*u)).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::NotConverged("no time constant gives a solvable linear fit".into()));
    }
    let energy: f64 = curve.samples().iter().map(|s| (s.y / s.sigma.unwrap_or(1.0)).powi(2)).sum();
    let best = values.iter().position(|v| *v <= min + 1e-12 * energy).expect("minimum exists");
    let first = values.iter().position(|v| v.is_finite()).expect("finite minimum");
    let last = values.iter().rposition(|v| v.is_finite()).expect("finite minimum");
    if best == first || best == last {
        return Err(Error::NotConverged("time constant runs to the edge of the searchable range".into()));
    }
    let (mut a, mut b) = (grid[best.saturating_sub(2)], grid[(best + 2).min(GRID_POINTS - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (cost(c), cost(d));
    while b - a > 1e-13 * a.abs().max(1.0) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    let tau = ((a + b) / 2.0).exp();
    let (coef, r) = profile(tau).ok_or_else(|| Error::NotConverged("singular linear fit at optimum".into()))?;
    Ok((tau, coef, r))
}

fn weights(curve: &DecayCurve) -> Vec<f64> {
    curve.samples().iter().map(|s| 1.0 / s.sigma.unwrap_or(1.0)).collect()
}

/// Inversion-recovery fit; needs at least four samples.
pub fn fit_bloch_longitudinal(curve: &DecayCurve) -> Result<BlochLongitudinal> {
    curve.require(4)?;
    let t = curve.times();
    let y = curve.values();
    let w = weights(curve);
    let profile = |tau: f64| {
        let rec: Vec<f64> = t.iter().map(|t| 1.0 - 2.0 * (-t / tau).exp()).collect();
        linear_fit(&[vec![1.0; t.len()], rec], &y, &w)
    };
    let (t1, c, r) = search(curve, profile)?;
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if c[1].abs() <= 1e-9 * peak {
        return Err(Error::NotConverged("curve has no recovering component".into()));
    }
    Ok(BlochLongitudinal { a0: c[0], a1: c[1], t1, residual_norm: r.sqrt() })
}

/// Echo-decay fit; needs at least three samples and a positive amplitude.
pub fn fit_bloch_transverse(curve: &DecayCurve) -> Result<BlochTransverse> {
    curve.require(3)?;
    let t = curve.times();
    let y = curve.values();
    let w = weights(curve);
    let profile = |tau: f64| linear_fit(&[t.iter().map(|t| (-t / tau).exp()).collect()], &y, &w);
    let (t2, c, r) = search(curve, profile)?;
    if !(c[0] > 0.0) {
        return Err(Error::NotConverged(format!("non-positive transverse amplitude {}", c[0])));
    }
    Ok(BlochTransverse { a1: c[0], t2, residual_norm: r.sqrt() })
}
