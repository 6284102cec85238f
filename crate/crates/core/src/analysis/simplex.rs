use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Largest infinity-norm distance from the best vertex.
    pub x_tol: f64,
    /// f_worst - f_best.
    pub f_tol: f64,
    /// Offset of each initial vertex along its coordinate axis.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iters: 20_000, x_tol: 1e-10, f_tol: 1e-20, initial_step: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Diameter,
    Spread,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

impl Minimum {
    pub fn converged(&self) -> bool {
        self.termination != Termination::MaxIterations
    }
}

/// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5.
pub fn nelder_mead_minimize<F>(mut f: F, x0: &[f64], options: &NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty parameter vector".into()));
    }
    let mut evaluations = 0usize;
    let mut best: (Vec<f64>, f64) = (x0.to_vec(), f64::INFINITY);
    let mut eval = |x: &[f64], best: &mut (Vec<f64>, f64)| -> Result<f64> {
        evaluations += 1;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { evaluation: evaluations, best_x: best.0.clone(), best_f: best.1 });
        }
        if v < best.1 {
            *best = (x.to_vec(), v);
        }
        Ok(v)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut best)?;
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += options.initial_step;
        let v = eval(&x, &mut best)?;
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let termination = loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal));
        let spread = simplex[n].1 - simplex[0].1;
        if spread <= options.f_tol {
            break Termination::Spread;
        }
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter <= options.x_tol {
            break Termination::Diameter;
        }
        if iterations >= options.max_iters {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let centroid: Vec<f64> =
            (0..n).map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(c, w)| c + coef * (c - w)).collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr, &mut best)?;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut best)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = eval(&xc, &mut best)?;
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut best)?;
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = vertex.0.iter().zip(&x_best).map(|(v, b)| b + 0.5 * (v - b)).collect();
            let v = eval(&x, &mut best)?;
            *vertex = (x, v);
        }
    };
    let (x, fx) = simplex.swap_remove(0);
    Ok(Minimum { x, f: fx, iterations, evaluations, termination })
}
