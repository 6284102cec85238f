//! Seven-parameter fit of the Redfield magnetization model to a longitudinal
//! and a transverse decay curve at once.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::curve::DecayCurve;
use super::simplex::{nelder_mead_minimize, Minimum, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::evolution::{EquilibriumPolarization, MagnetizationModel};
use crate::phys_params::{densities_from_fit, FitScaleParams, QuadrupolarConstant, SpectralDensities};
use crate::redfield::{numeric_eigensystem, CoherenceBlock, RelaxationModel};

pub const PARAM_NAMES: [&str; 7] = ["A1z", "A2z", "A1x", "A2x", "B0", "B1", "B2"];

/// Signal scales, preparation efficiencies and rate scales B_k = C J_k (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub a1z: f64,
    pub a2z: f64,
    pub a1x: f64,
    pub a2x: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl FitParams {
    pub fn to_array(&self) -> [f64; 7] {
        [self.a1z, self.a2z, self.a1x, self.a2x, self.b0, self.b1, self.b2]
    }

    pub fn from_array(p: [f64; 7]) -> Self {
        Self { a1z: p[0], a2z: p[1], a1x: p[2], a2x: p[3], b0: p[4], b1: p[5], b2: p[6] }
    }

    pub fn b(&self) -> [f64; 3] {
        [self.b0, self.b1, self.b2]
    }

    pub fn scale_params(&self) -> Result<FitScaleParams> {
        FitScaleParams::new(self.b0, self.b1, self.b2)
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> {
        PARAM_NAMES.into_iter().zip(self.to_array())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointFitInputs {
    pub equilibrium: EquilibriumPolarization,
    pub c: QuadrupolarConstant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointFitOptions {
    /// Including the initial guess itself.
    pub starts: usize,
    pub seed: u64,
    /// Starts are drawn log-uniformly within this factor of the guess.
    pub spread: f64,
    /// Fresh simplexes per start while the objective keeps improving.
    pub max_restarts: usize,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for JointFitOptions {
    fn default() -> Self {
        Self {
            starts: 16,
            seed: 0x5eed,
            spread: 2.0,
            max_restarts: 12,
            nelder_mead: NelderMeadOptions { max_iters: 20_000, x_tol: 1e-11, f_tol: 1e-30, initial_step: 0.1 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: FitParams,
    /// One standard deviation; infinite for directions the data cannot fix.
    pub uncertainties: FitParams,
    /// Euclidean norm of the (sigma-weighted) residual vector.
    pub residual_norm: f64,
    pub samples: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn densities(&self, c: &QuadrupolarConstant) -> Result<SpectralDensities> {
        densities_from_fit(&self.params.scale_params()?, c)
    }

    pub fn density_uncertainties(&self, c: &QuadrupolarConstant) -> [f64; 3] {
        let u = self.uncertainties.b();
        [u[0] / c.c, u[1] / c.c, u[2] / c.c]
    }
}

/// Longitudinal and transverse models for one parameter set.
pub fn joint_models(params: &FitParams, inputs: &JointFitInputs) -> Result<(MagnetizationModel, MagnetizationModel)> {
    let model = RelaxationModel::spin_seven_halves();
    let j = params.b().map(|b| b / inputs.c.c);
    let e0 = numeric_eigensystem(&CoherenceBlock { q: 0, matrix: model.block_matrix(0, j)? }, &inputs.c)?;
    let e1 = numeric_eigensystem(&CoherenceBlock { q: 1, matrix: model.block_matrix(1, j)? }, &inputs.c)?;
    Ok((
        MagnetizationModel::longitudinal(&e0, params.a1z, params.a2z, &inputs.equilibrium)?,
        MagnetizationModel::transverse(&e1, params.a1x, params.a2x)?,
    ))
}

struct Objective<'a> {
    long: &'a DecayCurve,
    trans: &'a DecayCurve,
    inputs: &'a JointFitInputs,
    scale: [f64; 7],
}

const NEGATIVE_PENALTY: f64 = 1e6;

impl Objective<'_> {
    fn params(&self, x: &[f64]) -> FitParams {
        FitParams::from_array(std::array::from_fn(|i| x[i] * self.scale[i]))
    }

    /// Weighted sum of squares; B below zero is clamped and penalized.
    fn eval(&self, x: &[f64]) -> f64 {
        let mut p = self.params(x);
        let mut penalty = 0.0;
        for b in [&mut p.b0, &mut p.b1, &mut p.b2] {
            if *b < 0.0 {
                penalty += NEGATIVE_PENALTY * *b * *b;
                *b = 0.0;
            }
        }
        match joint_models(&p, self.inputs) {
            Ok((mz, mx)) => ssr(&mz, self.long) + ssr(&mx, self.trans) + penalty,
            Err(_) => f64::MAX,
        }
    }
}

fn ssr(model: &MagnetizationModel, curve: &DecayCurve) -> f64 {
    curve
        .samples()
        .iter()
        .map(|s| {
            let r = (model.value(s.t) - s.y) / s.sigma.unwrap_or(1.0);
            r * r
        })
        .sum()
}

fn run_start(obj: &Objective, x0: Vec<f64>, options: &JointFitOptions) -> Result<Minimum> {
    let mut m = nelder_mead_minimize(|x| obj.eval(x), &x0, &options.nelder_mead)?;
    let mut iterations = m.iterations;
    for _ in 0..options.max_restarts {
        let next = nelder_mead_minimize(|x| obj.eval(x), &m.x, &options.nelder_mead)?;
        iterations += next.iterations;
        let improved = next.f < m.f * (1.0 - 1e-9);
        if next.f <= m.f {
            m = next;
        }
        if !improved {
            break;
        }
    }
    m.iterations = iterations;
    Ok(m)
}

/// Central-difference Hessian.
fn hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let at = |d: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for (i, s) in d {
            y[*i] += s;
        }
        f(&y)
    };
    let f0 = f(x);
    let mut hm = DMatrix::zeros(n, n);
    for i in 0..n {
        hm[(i, i)] = (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hm[(i, j)] = v;
            hm[(j, i)] = v;
        }
    }
    hm
}

/// Standard deviations 2 s^2 H^+ on the diagonal; parameters touching the
/// numerical null space of H get infinity.
fn standard_errors(h: &DMatrix<f64>, s2: f64) -> Vec<f64> {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h.clone());
    let top = eig.eigenvalues.amax();
    let mut var = vec![0.0; n];
    let mut unbounded = vec![false; n];
    for k in 0..n {
        let l = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        if l <= 1e-9 * top {
            for i in 0..n {
                if v[i].abs() > 1e-6 {
                    unbounded[i] = true;
                }
            }
        } else {
            for i in 0..n {
                var[i] += v[i] * v[i] / l;
            }
        }
    }
    (0..n).map(|i| if unbounded[i] { f64::INFINITY } else { (2.0 * s2 * var[i]).sqrt() }).collect()
}

/// Minimizes the joint sum of squared residuals from several starts around
/// `init` and returns the best one.
///
/// Weighting is 1/sigma when a curve carries sigmas and uniform otherwise.
/// A1x and A2x enter only as a product, so their individual uncertainties
/// are reported as infinite.
pub fn fit_redfield_joint(
    long: &DecayCurve,
    trans: &DecayCurve,
    inputs: &JointFitInputs,
    init: &FitParams,
    options: &JointFitOptions,
) -> Result<FitResult> {
    long.require(4)?;
    trans.require(4)?;
    if options.starts == 0 {
        return Err(Error::InvalidArgument("at least one start required".into()));
    }
    let guess = init.to_array();
    if guess.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial guess is not finite".into()));
    }
    let scale = guess.map(|v| if v != 0.0 { v.abs() } else { 1.0 });
    let obj = Objective { long, trans, inputs, scale };
    let x_init: Vec<f64> = guess.iter().zip(&scale).map(|(g, s)| g / s).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let ln = options.spread.max(1.0).ln();
    let starts: Vec<Vec<f64>> = (0..options.starts)
        .map(|k| {
            if k == 0 {
                x_init.clone()
            } else {
                x_init.iter().map(|x| x * rng.random_range(-ln..=ln).exp()).collect()
            }
        })
        .collect();

    let runs: Vec<Result<Minimum>> = starts.into_par_iter().map(|x0| run_start(&obj, x0, options)).collect();
    let iterations = runs.iter().filter_map(|r| r.as_ref().ok()).map(|m| m.iterations).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| match (&a, &b) {
            (Ok(x), Ok(y)) => {
                if y.f < x.f {
                    b
                } else {
                    a
                }
            }
            (Err(_), Ok(_)) => b,
            _ => a,
        })
        .expect("at least one start")?;

    let n = long.len() + trans.len();
    let weighted = long.sigmas().is_some() && trans.sigmas().is_some();
    let s2 = if weighted { 1.0 } else { best.f / (n.saturating_sub(7).max(1)) as f64 };
    let h = hessian(&|x| obj.eval(x), &best.x, 1e-4);
    let se = standard_errors(&h, s2);

    let params = obj.params(&best.x);
    let uncertainties = FitParams::from_array(std::array::from_fn(|i| se[i] * scale[i]));
    let nonnegative = params.b().iter().all(|b| *b >= 0.0);
    Ok(FitResult {
        params,
        uncertainties,
        residual_norm: best.f.sqrt(),
        samples: n,
        iterations,
        converged: best.converged() && nonnegative,
    })
}
