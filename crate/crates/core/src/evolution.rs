//! Multiexponential evolution of density matrices and the magnetization
//! signals built from it.
//!
//! Every coherence order evolves independently: with forward transformation W
//! and inverse W_bar of block q,
//! rho_{q+n,n}(t) = rho_eq_{q+n,n} + sum_p W_bar_{n,p} exp(-R_p t) (W (rho(0) - rho_eq))_p.
//! Only q = 0 carries an equilibrium part. Negative orders follow by
//! Hermitian conjugation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::DecayCurve;
use crate::error::{Error, Result};
use crate::phys_params::{QuadrupolarConstant, SpectralDensities};
use crate::redfield::{numeric_eigensystem, BlockEigensystem, RelaxationModel};
use crate::spin_algebra::SpinSystem;

const STATE_TOL: f64 = 1e-12;

/// Hermitian, unit-trace density matrix in the Zeeman basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: DMatrix<Complex64>,
}

impl DensityState {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.ncols() });
        }
        let herm = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > STATE_TOL {
            return Err(Error::InvalidArgument(format!("density matrix not Hermitian (defect {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} is not 1")));
        }
        Ok(Self { matrix })
    }

    fn unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    /// |psi><psi| for a state vector normalized on the way in.
    pub fn from_state_vector(psi: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        Ok(Self::unchecked(&v * v.adjoint()))
    }

    /// Populations on the diagonal, no coherences.
    pub fn from_populations(p: &[f64]) -> Result<Self> {
        let m = DMatrix::from_diagonal(&DVector::from_iterator(p.len(), p.iter().map(|x| Complex64::new(*x, 0.0))));
        Self::new(m)
    }

    /// Basis state |k><k| (k = 0 is m = I).
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidArgument(format!("basis index {k} outside dimension {dim}")));
        }
        let mut p = vec![0.0; dim];
        p[k] = 1.0;
        Self::from_populations(&p)
    }

    pub fn pure_top(dim: usize) -> Result<Self> {
        Self::basis_state(dim, 0)
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::from_populations(&vec![1.0 / dim as f64; dim])
    }

    /// (|I> + |-I>)/sqrt 2.
    pub fn noon(system: SpinSystem) -> Self {
        let d = system.dim();
        let mut psi = vec![Complex64::new(0.0, 0.0); d];
        psi[0] = Complex64::new(1.0, 0.0);
        psi[d - 1] = Complex64::new(1.0, 0.0);
        Self::from_state_vector(&psi).expect("non-zero vector")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Entry (row, col), 0-based.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// rho_{q+n, n} (0-based n).
    pub fn element(&self, q: usize, n: usize) -> Complex64 {
        self.matrix[(q + n, n)]
    }

    /// All elements of order q, n = 0..dim-q.
    pub fn coherence(&self, q: usize) -> Vec<Complex64> {
        (0..self.dim().saturating_sub(q)).map(|n| self.element(q, n)).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// tr(A rho) for a real observable given as a matrix.
    pub fn expectation(&self, observable: &DMatrix<Complex64>) -> Complex64 {
        (observable * &self.matrix).trace()
    }
}

/// Steady state of the relaxation; diagonal in the Zeeman basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumState(DensityState);

impl EquilibriumState {
    pub fn new(state: DensityState) -> Result<Self> {
        let m = state.matrix();
        let n = m.nrows();
        for r in 0..n {
            for c in 0..n {
                if r != c && m[(r, c)].norm() > STATE_TOL {
                    return Err(Error::InvalidArgument("equilibrium state must be diagonal".into()));
                }
            }
        }
        Ok(Self(state))
    }

    pub fn pure_top(dim: usize) -> Result<Self> {
        Self::new(DensityState::pure_top(dim)?)
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(DensityState::uniform(dim)?)
    }

    pub fn from_populations(p: &[f64]) -> Result<Self> {
        Self::new(DensityState::from_populations(p)?)
    }

    pub fn state(&self) -> &DensityState {
        &self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.0.dim()).map(|k| self.0.get(k, k).re).collect()
    }
}

/// Initial coordinates of one block in its eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub q: usize,
    pub values: Vec<Complex64>,
}

fn apply_real(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| v[c] * m[(r, c)]).sum()).collect()
}

/// rho~_p = sum_n W_{p,n} rho_{q+n,n}(0).
pub fn initial_mode_amplitudes(q: usize, w: &DMatrix<f64>, rho0: &DensityState) -> Result<ModeAmplitudes> {
    let n = rho0.dim().checked_sub(q).filter(|n| *n > 0).ok_or(Error::CoherenceOrder(q as i32))?;
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.nrows() });
    }
    Ok(ModeAmplitudes { q, values: apply_real(w, &rho0.coherence(q)) })
}

/// Deviation of rho0 from equilibrium within block q.
fn deviation(q: usize, rho0: &DensityState, rho_eq: &EquilibriumState) -> Result<Vec<Complex64>> {
    if rho0.dim() != rho_eq.state().dim() {
        return Err(Error::DimensionMismatch { expected: rho0.dim(), found: rho_eq.state().dim() });
    }
    let mut v = rho0.coherence(q);
    if q == 0 {
        for (k, x) in v.iter_mut().enumerate() {
            *x -= rho_eq.state().get(k, k);
        }
    }
    Ok(v)
}

fn combine(eig: &BlockEigensystem, tilde: &[Complex64], t: f64) -> Vec<Complex64> {
    let decayed: Vec<Complex64> = tilde.iter().zip(&eig.rates).map(|(a, r)| a * (-r * t).exp()).collect();
    apply_real(&eig.w_bar, &decayed)
}

/// Elements rho_{q+n,n}(t) of one block.
pub fn evolve_block(
    eigensystem: &BlockEigensystem,
    rho0: &DensityState,
    rho_eq: &EquilibriumState,
    t: f64,
) -> Result<Vec<Complex64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("elapsed time {t} is negative")));
    }
    let q = eigensystem.q;
    let dev = deviation(q, rho0, rho_eq)?;
    if dev.len() != eigensystem.dim() {
        return Err(Error::DimensionMismatch { expected: eigensystem.dim(), found: dev.len() });
    }
    let tilde = apply_real(&eigensystem.w, &dev);
    let mut out = combine(eigensystem, &tilde, t);
    if q == 0 {
        for (k, x) in out.iter_mut().enumerate() {
            *x += rho_eq.state().get(k, k);
        }
    }
    Ok(out)
}

/// Eigensystems of every non-negative coherence order at fixed densities.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    blocks: Vec<BlockEigensystem>,
}

impl Propagator {
    pub fn new(model: &RelaxationModel, j: &SpectralDensities, c: &QuadrupolarConstant) -> Result<Self> {
        let blocks = (0..model.dim())
            .map(|q| numeric_eigensystem(&model.block(q, j)?, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: model.dim(), blocks })
    }

    pub fn eigensystem(&self, q: usize) -> &BlockEigensystem {
        &self.blocks[q]
    }

    pub fn trajectory(&self, rho0: &DensityState, rho_eq: &EquilibriumState, times: &[f64]) -> Result<Vec<DensityState>> {
        if rho0.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho0.dim() });
        }
        if times.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidArgument("times must be sorted ascending".into()));
        }
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
            return Err(Error::InvalidArgument(format!("elapsed time {t} is negative")));
        }
        let tildes: Vec<Vec<Complex64>> = self
            .blocks
            .iter()
            .map(|e| deviation(e.q, rho0, rho_eq).map(|d| apply_real(&e.w, &d)))
            .collect::<Result<_>>()?;
        let eq = rho_eq.populations();
        Ok(times
            .par_iter()
            .map(|&t| {
                let d = self.dim;
                let mut m = DMatrix::<Complex64>::zeros(d, d);
                for (e, tilde) in self.blocks.iter().zip(&tildes) {
                    let q = e.q;
                    for (n, x) in combine(e, tilde, t).into_iter().enumerate() {
                        if q == 0 {
                            m[(n, n)] = Complex64::new(x.re + eq[n], 0.0);
                        } else {
                            m[(q + n, n)] = x;
                            m[(n, q + n)] = x.conj();
                        }
                    }
                }
                DensityState::unchecked(m)
            })
            .collect())
    }
}

/// States at the requested times.
pub fn propagate(
    rho0: &DensityState,
    rho_eq: &EquilibriumState,
    j: &SpectralDensities,
    c: &QuadrupolarConstant,
    times: &[f64],
) -> Result<Vec<DensityState>> {
    Propagator::new(RelaxationModel::spin_seven_halves(), j, c)?.trajectory(rho0, rho_eq, times)
}

/// Equilibrium reference for the magnetization models.
///
/// Signals are computed from deviations from the identity; `HighTemperature`
/// takes I_z itself as that deviation, so the equilibrium term of <I_z> is
/// tr(I_z^2) before scaling.
#[derive(Debug, Clone, PartialEq)]
pub enum EquilibriumPolarization {
    HighTemperature,
    State(EquilibriumState),
}

impl EquilibriumPolarization {
    pub fn deviation(&self, dim: usize) -> Vec<f64> {
        match self {
            Self::HighTemperature => iz_diagonal(dim),
            Self::State(s) => s.populations().iter().map(|p| p - 1.0 / dim as f64).collect(),
        }
    }
}

fn iz_diagonal(dim: usize) -> Vec<f64> {
    let s = (dim as f64 - 1.0) / 2.0;
    (0..dim).map(|k| s - k as f64).collect()
}

/// 2 I_x(k, k+1), the weight of Re rho_{k+1,k} in <I_x>.
fn ix_weights(dim: usize) -> Vec<f64> {
    let s = (dim as f64 - 1.0) / 2.0;
    (1..dim)
        .map(|k| {
            let m = s - k as f64;
            (s * (s + 1.0) - m * (m + 1.0)).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Longitudinal,
    Transverse,
}

/// <I>(t) = scale (equilibrium_term + sum_n A_n exp(-R_n t)).
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationModel {
    pub flavor: Flavor,
    pub scale: f64,
    pub prep_efficiency: f64,
    pub mode_amplitudes: Vec<f64>,
    pub equilibrium_term: f64,
    pub rates: Vec<f64>,
}

fn mode_weights(eig: &BlockEigensystem, observable: &[f64], start: &[f64]) -> Vec<f64> {
    let tilde = &eig.w * DVector::from_column_slice(start);
    let proj = DVector::from_column_slice(observable).transpose() * &eig.w_bar;
    (0..eig.dim()).map(|n| proj[n] * tilde[n]).collect()
}

impl MagnetizationModel {
    /// Inversion recovery: rho(0) - 1/d = -prep_efficiency I_z.
    pub fn longitudinal(
        eig0: &BlockEigensystem,
        scale: f64,
        prep_efficiency: f64,
        equilibrium: &EquilibriumPolarization,
    ) -> Result<Self> {
        if eig0.q != 0 {
            return Err(Error::CoherenceOrder(eig0.q as i32));
        }
        let d = eig0.dim();
        let iz = iz_diagonal(d);
        let eq = equilibrium.deviation(d);
        let start: Vec<f64> = iz.iter().zip(&eq).map(|(z, e)| -prep_efficiency * z - e).collect();
        Ok(Self {
            flavor: Flavor::Longitudinal,
            scale,
            prep_efficiency,
            mode_amplitudes: mode_weights(eig0, &iz, &start),
            equilibrium_term: iz.iter().zip(&eq).map(|(z, e)| z * e).sum(),
            rates: eig0.rates.clone(),
        })
    }

    /// Echo decay: rho(0) - 1/d = prep_efficiency I_x.
    pub fn transverse(eig1: &BlockEigensystem, scale: f64, prep_efficiency: f64) -> Result<Self> {
        if eig1.q != 1 {
            return Err(Error::CoherenceOrder(eig1.q as i32));
        }
        let w = ix_weights(eig1.dim() + 1);
        let start: Vec<f64> = w.iter().map(|x| prep_efficiency * x / 2.0).collect();
        Ok(Self {
            flavor: Flavor::Transverse,
            scale,
            prep_efficiency,
            mode_amplitudes: mode_weights(eig1, &w, &start),
            equilibrium_term: 0.0,
            rates: eig1.rates.clone(),
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        let sum: f64 = self.mode_amplitudes.iter().zip(&self.rates).map(|(a, r)| a * (-r * t).exp()).sum();
        self.scale * (self.equilibrium_term + sum)
    }

    /// Scaled amplitudes scale * A_n.
    pub fn scaled_amplitudes(&self) -> Vec<f64> {
        self.mode_amplitudes.iter().map(|a| a * self.scale).collect()
    }

    fn curve(&self, times: &[f64]) -> Result<DecayCurve> {
        DecayCurve::from_xy(times, &times.iter().map(|t| self.value(*t)).collect::<Vec<_>>())
    }
}

pub fn longitudinal_signal(model: &MagnetizationModel, times: &[f64]) -> Result<DecayCurve> {
    if model.flavor != Flavor::Longitudinal {
        return Err(Error::InvalidArgument("model is not longitudinal".into()));
    }
    model.curve(times)
}

pub fn transverse_signal(model: &MagnetizationModel, times: &[f64]) -> Result<DecayCurve> {
    if model.flavor != Flavor::Transverse {
        return Err(Error::InvalidArgument("model is not transverse".into()));
    }
    model.curve(times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phys_params::{lorentzian_spectral_densities, quadrupolar_constant_simplified, Provenance};

    fn c() -> QuadrupolarConstant {
        quadrupolar_constant_simplified(266e3).unwrap()
    }

    fn j() -> SpectralDensities {
        lorentzian_spectral_densities(47.24e6, 4.1e-9).unwrap()
    }

    fn c1(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn state_validation() {
        assert!(DensityState::new(DMatrix::identity(2, 2)).is_err());
        let mut m = DMatrix::<Complex64>::identity(2, 2) * c1(0.5);
        m[(0, 1)] = Complex64::new(0.1, 0.1);
        assert!(DensityState::new(m.clone()).is_err());
        m[(1, 0)] = Complex64::new(0.1, -0.1);
        assert!(DensityState::new(m).is_ok());
        let off = DensityState::from_populations(&[0.5, 0.5]).unwrap();
        assert!(EquilibriumState::new(off).is_ok());
        assert!(EquilibriumState::new(DensityState::noon(SpinSystem::seven_halves())).is_err());
    }

    #[test]
    fn noon_layout() {
        let s = DensityState::noon(SpinSystem::seven_halves());
        for (r, c) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
            assert!((s.get(r, c) - c1(0.5)).norm() < 1e-15);
        }
        assert_eq!(s.element(7, 0), s.get(7, 0));
    }

    #[test]
    fn q6_mode_amplitudes() {
        let mut m = DMatrix::<Complex64>::zeros(8, 8);
        m[(0, 0)] = c1(0.5);
        m[(1, 1)] = c1(0.5);
        m[(6, 0)] = c1(1.0);
        m[(0, 6)] = c1(1.0);
        let rho = DensityState::unchecked(m);
        let h = 1.0 / 2f64.sqrt();
        let w = DMatrix::from_row_slice(2, 2, &[-h, h, h, h]);
        let a = initial_mode_amplitudes(6, &w, &rho).unwrap();
        assert!((a.values[0] - c1(-h)).norm() < 1e-15);
        assert!((a.values[1] - c1(h)).norm() < 1e-15);
        assert!(initial_mode_amplitudes(5, &w, &rho).is_err());
    }

    #[test]
    fn equilibrium_has_no_coherent_amplitudes() {
        let p = Propagator::new(RelaxationModel::spin_seven_halves(), &j(), &c()).unwrap();
        let eq = EquilibriumState::pure_top(8).unwrap();
        for q in 1..8 {
            let a = initial_mode_amplitudes(q, &p.eigensystem(q).w, eq.state()).unwrap();
            assert!(a.values.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn q7_single_exponential() {
        let p = Propagator::new(RelaxationModel::spin_seven_halves(), &j(), &c()).unwrap();
        let rho = DensityState::noon(SpinSystem::seven_halves());
        let eq = EquilibriumState::pure_top(8).unwrap();
        let e7 = p.eigensystem(7);
        let v = evolve_block(e7, &rho, &eq, 1.0 / e7.rates[0]).unwrap();
        assert!((v[0].re - 0.5 / std::f64::consts::E).abs() < 1e-12);
        let at_ref = evolve_block(e7, &rho, &eq, 46.1e-6).unwrap();
        assert!((at_ref[0].re - 0.1839).abs() < 5e-4);
        assert!(evolve_block(e7, &rho, &eq, -1e-9).is_err());
    }

    #[test]
    fn block_limits() {
        let p = Propagator::new(RelaxationModel::spin_seven_halves(), &j(), &c()).unwrap();
        let rho = DensityState::noon(SpinSystem::seven_halves());
        let eq = EquilibriumState::pure_top(8).unwrap();
        for q in 0..8 {
            let e = p.eigensystem(q);
            let v0 = evolve_block(e, &rho, &eq, 0.0).unwrap();
            for (a, b) in v0.iter().zip(rho.coherence(q)) {
                assert!((a - b).norm() < 1e-12);
            }
            let slowest = e.rates.iter().copied().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
            let late = evolve_block(e, &rho, &eq, 20.0 / slowest).unwrap();
            let target = if q == 0 { eq.populations() } else { vec![0.0; 8 - q] };
            for (a, b) in late.iter().zip(target) {
                assert!((a - c1(b)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn trajectory_rejects_unsorted_times() {
        let rho = DensityState::noon(SpinSystem::seven_halves());
        let eq = EquilibriumState::pure_top(8).unwrap();
        assert!(propagate(&rho, &eq, &j(), &c(), &[0.0, 2e-6, 1e-6]).is_err());
    }

    #[test]
    fn fixed_point() {
        let eq = EquilibriumState::pure_top(8).unwrap();
        let traj = propagate(eq.state(), &eq, &j(), &c(), &[0.0, 1e-5, 1e-3]).unwrap();
        for s in traj {
            assert!((s.matrix() - eq.state().matrix()).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn longitudinal_start_and_equilibrium() {
        let cc = QuadrupolarConstant { c: 1.0, provenance: Provenance::UserSupplied };
        let jj = SpectralDensities::new(83.0, 3.8, 0.18).unwrap();
        let e0 = numeric_eigensystem(&RelaxationModel::spin_seven_halves().block(0, &jj).unwrap(), &cc).unwrap();
        let m = MagnetizationModel::longitudinal(&e0, 0.023, 1.0, &EquilibriumPolarization::HighTemperature).unwrap();
        assert_eq!(m.mode_amplitudes.len(), 8);
        assert!((m.equilibrium_term - 42.0).abs() < 1e-12);
        // <I_z>(0) = -prep tr(I_z^2)
        assert!((m.value(0.0) - 0.023 * -42.0).abs() < 1e-12);
        assert!((m.value(100.0) - 0.023 * 42.0).abs() < 1e-9);
        let still = MagnetizationModel::longitudinal(&e0, 0.023, -1.0, &EquilibriumPolarization::HighTemperature).unwrap();
        assert!(still.mode_amplitudes.iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn transverse_start_and_decay() {
        let cc = QuadrupolarConstant { c: 1.0, provenance: Provenance::UserSupplied };
        let jj = SpectralDensities::new(83.0, 3.8, 0.18).unwrap();
        let e1 = numeric_eigensystem(&RelaxationModel::spin_seven_halves().block(1, &jj).unwrap(), &cc).unwrap();
        let m = MagnetizationModel::transverse(&e1, 0.019, 0.99).unwrap();
        assert_eq!(m.mode_amplitudes.len(), 7);
        // tr(I_x * 0.99 I_x) = 0.99 * 42
        assert!((m.value(0.0) - 0.019 * 0.99 * 42.0).abs() < 1e-12);
        assert!(m.value(10.0).abs() < 1e-12);
        assert!(longitudinal_signal(&m, &[0.0, 1.0]).is_err());
        assert_eq!(transverse_signal(&m, &[0.0, 1.0]).unwrap().len(), 2);
    }
}
