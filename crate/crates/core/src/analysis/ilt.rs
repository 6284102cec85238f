//! Relaxation-time distributions by Tikhonov-regularized non-negative least
//! squares on a logarithmic grid.

use nalgebra::{DMatrix, DVector};

use super::curve::DecayCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// exp(-t/T)
    Decay,
    /// 1 - 2 exp(-t/T)
    Recovery,
}

impl Kernel {
    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        let e = (-t / tau).exp();
        match self {
            Kernel::Decay => e,
            Kernel::Recovery => 1.0 - 2.0 * e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) || self.points < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs 0 < t_min < t_max and at least 2 points, got {self:?}"
            )));
        }
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        Ok((0..self.points).map(|i| (a + (b - a) * i as f64 / (self.points - 1) as f64).exp()).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDistribution {
    /// Seconds, log-spaced.
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    /// ||K w - y|| without the penalty term.
    pub residual_norm: f64,
    /// Ratio of extreme singular values of the kernel matrix.
    pub condition_number: f64,
}

impl TimeDistribution {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn peak_index(&self) -> usize {
        self.weights
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, w)| if *w > acc.1 { (i, *w) } else { acc })
            .0
    }

    /// Weight in grid points within `radius` of `center`.
    pub fn mass_near(&self, center: usize, radius: usize) -> f64 {
        let lo = center.saturating_sub(radius);
        let hi = (center + radius).min(self.weights.len() - 1);
        self.weights[lo..=hi].iter().sum()
    }
}

/// Lawson-Hanson active-set solution of min ||A x - b|| subject to x >= 0.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: b.len() });
    }
    let tol = 10.0 * f64::EPSILON * a.norm() * m.max(n) as f64 * b.norm().max(1.0);
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|i| passive[*i]).collect();
        let sub = DMatrix::from_fn(m, idx.len(), |r, c| a[(r, idx[c])]);
        let sol = sub.svd(true, true).solve(b, 1e-14).expect("both factors computed");
        let mut z = DVector::zeros(n);
        for (k, i) in idx.iter().enumerate() {
            z[*i] = sol[k];
        }
        z
    };
    for _ in 0..3 * n.max(1) {
        let w = a.transpose() * (b - a * &x);
        let pick = (0..n).filter(|i| !passive[*i]).max_by(|i, j| w[*i].total_cmp(&w[*j]));
        let Some(t) = pick.filter(|t| w[*t] > tol) else {
            return Ok(x);
        };
        passive[t] = true;
        loop {
            let z = solve_passive(&passive);
            if (0..n).filter(|i| passive[*i]).all(|i| z[i] > 0.0) {
                x = z;
                break;
            }
            let step = (0..n)
                .filter(|i| passive[*i] && z[*i] <= 0.0)
                .map(|i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * step;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|p| *p) {
                break;
            }
        }
    }
    Err(Error::NotConverged("non-negative least squares exceeded its iteration budget".into()))
}

fn solve(k: &DMatrix<f64>, y: &DVector<f64>, alpha: f64) -> Result<(DVector<f64>, f64)> {
    let (m, n) = k.shape();
    let mut a = DMatrix::zeros(m + n, n);
    a.view_mut((0, 0), (m, n)).copy_from(k);
    let s = alpha.sqrt();
    for i in 0..n {
        a[(m + i, i)] = s;
    }
    let mut b = DVector::zeros(m + n);
    b.rows_mut(0, m).copy_from(y);
    let w = nnls(&a, &b)?;
    let r = (k * &w - y).norm();
    Ok((w, r))
}

/// Inverts `curve` onto the grid. `alpha = None` selects the penalty by the
/// discrepancy principle: the residual is matched to the noise level, taken
/// from the sigmas when present and otherwise from the unregularized fit.
pub fn ilt(curve: &DecayCurve, grid: &GridSpec, alpha: Option<f64>, kernel: Kernel) -> Result<TimeDistribution> {
    curve.require(4)?;
    let taus = grid.times()?;
    let w_row: Vec<f64> = curve.samples().iter().map(|s| 1.0 / s.sigma.unwrap_or(1.0)).collect();
    let t = curve.times();
    let k = DMatrix::from_fn(t.len(), taus.len(), |i, j| kernel.eval(t[i], taus[j]) * w_row[i]);
    let y = DVector::from_iterator(t.len(), curve.values().iter().zip(&w_row).map(|(y, w)| y * w));
    let sv = k.clone().svd(false, false).singular_values;
    let condition_number = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };

    let alpha = match alpha {
        Some(a) if a >= 0.0 && a.is_finite() => a,
        Some(a) => return Err(Error::InvalidArgument(format!("alpha must be non-negative, got {a}"))),
        None => discrepancy_alpha(&k, &y, curve.sigmas().is_some())?,
    };
    let (weights, residual_norm) = solve(&k, &y, alpha)?;
    Ok(TimeDistribution { grid: taus, weights: weights.iter().copied().collect(), alpha, residual_norm, condition_number })
}

fn discrepancy_alpha(k: &DMatrix<f64>, y: &DVector<f64>, weighted: bool) -> Result<f64> {
    let m = y.len() as f64;
    let target = if weighted {
        m.sqrt()
    } else {
        let (w0, r0) = solve(k, y, 0.0)?;
        let active = w0.iter().filter(|w| **w > 0.0).count() as f64;
        let sigma2 = r0 * r0 / (m - active).max(1.0);
        (m * sigma2).sqrt()
    };
    let scale = k.norm_squared() / k.ncols() as f64;
    let (mut lo, mut hi) = ((1e-14 * scale).ln(), (1e4 * scale).ln());
    if solve(k, y, lo.exp())?.1 >= target {
        return Ok(lo.exp());
    }
    if solve(k, y, hi.exp())?.1 <= target {
        return Ok(hi.exp());
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if solve(k, y, mid.exp())?.1 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_matches_unconstrained_when_interior() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = nnls(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nnls_clamps_negative_direction() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![-1.0, 2.0]);
        let x = nnls(&a, &b).unwrap();
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_square_inverse() {
        let grid = GridSpec { t_min: 1e-3, t_max: 1.0, points: 4 };
        let taus = grid.times().unwrap();
        let truth = [0.2, 0.0, 0.5, 0.3];
        let t: Vec<f64> = (0..4).map(|i| 1e-3 * 10f64.powf(i as f64)).collect();
        let y: Vec<f64> =
            t.iter().map(|t| taus.iter().zip(&truth).map(|(tau, w)| w * Kernel::Decay.eval(*t, *tau)).sum()).collect();
        let d = ilt(&DecayCurve::from_xy(&t, &y).unwrap(), &grid, Some(0.0), Kernel::Decay).unwrap();
        assert!(d.residual_norm < 1e-8);
        assert!(d.condition_number.is_finite());
    }

    #[test]
    fn bad_inputs() {
        let c = DecayCurve::from_xy(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.5, 0.2, 0.1]).unwrap();
        let g = GridSpec { t_min: 0.1, t_max: 10.0, points: 8 };
        assert!(ilt(&c, &g, Some(-1.0), Kernel::Decay).is_err());
        assert!(ilt(&c, &GridSpec { t_min: 0.0, ..g }, None, Kernel::Decay).is_err());
        assert!(ilt(&c, &GridSpec { points: 1, ..g }, None, Kernel::Decay).is_err());
    }

    #[test]
    fn recovery_kernel_localizes() {
        let g = GridSpec { t_min: 1e-3, t_max: 10.0, points: 64 };
        let taus = g.times().unwrap();
        let t: Vec<f64> = (0..40).map(|i| 1e-4 * 1e5f64.powf(i as f64 / 39.0)).collect();
        let y: Vec<f64> = t.iter().map(|t| Kernel::Recovery.eval(*t, taus[30])).collect();
        let d = ilt(&DecayCurve::from_xy(&t, &y).unwrap(), &g, Some(1e-8), Kernel::Recovery).unwrap();
        assert!(d.mass_near(30, 1) >= 0.9 * d.total_weight());
    }
}
