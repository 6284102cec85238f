//! Spectral densities, the quadrupolar constant and the fit scale mapping.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Spectral density values J(p w0) for p = 0, 1, 2, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensities {
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
}

impl SpectralDensities {
    pub fn new(j0: f64, j1: f64, j2: f64) -> Result<Self> {
        for (name, v) in [("J0", j0), ("J1", j1), ("J2", j2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { j0, j1, j2 })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.j0, self.j1, self.j2]
    }

    pub fn get(&self, p: usize) -> f64 {
        self.as_array()[p]
    }

    pub fn max(&self) -> f64 {
        self.j0.max(self.j1).max(self.j2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FromFullFormula,
    FromSimplified,
    UserSupplied,
}

/// Overall rate scale C in Hz^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupolarConstant {
    pub c: f64,
    pub provenance: Provenance,
}

impl QuadrupolarConstant {
    pub fn user_supplied(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
        }
        Ok(Self { c, provenance: Provenance::UserSupplied })
    }

    pub fn value(&self) -> f64 {
        self.c
    }
}

/// Fit parameters B_k = C J_k, in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitScaleParams {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl FitScaleParams {
    pub fn new(b0: f64, b1: f64, b2: f64) -> Result<Self> {
        for v in [b0, b1, b2] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("fit scale parameters must be non-negative, got {v}")));
            }
        }
        Ok(Self { b0, b1, b2 })
    }

    pub fn from_densities(j: &SpectralDensities, c: &QuadrupolarConstant) -> Self {
        Self { b0: j.j0 * c.c, b1: j.j1 * c.c, b2: j.j2 * c.c }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.b0, self.b1, self.b2]
    }
}

/// Isotropic single-correlation-time densities J_p = 2 tc / (1 + (p w0 tc)^2).
pub fn lorentzian_spectral_densities(larmor_freq: f64, correlation_time: f64) -> Result<SpectralDensities> {
    if !(larmor_freq > 0.0 && correlation_time > 0.0) {
        return Err(Error::InvalidArgument("Larmor frequency and correlation time must be positive".into()));
    }
    let w = 2.0 * PI * larmor_freq * correlation_time;
    let j = |p: f64| 2.0 * correlation_time / (1.0 + (p * w).powi(2));
    SpectralDensities::new(j(0.0), j(1.0), j(2.0))
}

/// C = (9/10) (eQV/hbar)^2 (1 + eta^2/3) / (2I(2I-1))^2 with the coupling
/// given in Hz (the angular value divided by 2 pi).
pub fn quadrupolar_constant_full(two_i: u32, quad_coupling: f64, asymmetry: f64) -> Result<QuadrupolarConstant> {
    if !(0.0..=1.0).contains(&asymmetry) {
        return Err(Error::InvalidArgument(format!("asymmetry {asymmetry} outside [0, 1]")));
    }
    if two_i < 2 {
        return Err(Error::UnsupportedSpin(two_i));
    }
    if !(quad_coupling.is_finite() && quad_coupling > 0.0) {
        return Err(Error::InvalidArgument("quadrupole coupling must be positive".into()));
    }
    let ti = two_i as f64;
    let w = 2.0 * PI * quad_coupling;
    let c = 0.9 * w * w * (1.0 + asymmetry * asymmetry / 3.0) / (ti * (ti - 1.0)).powi(2);
    Ok(QuadrupolarConstant { c, provenance: Provenance::FromFullFormula })
}

/// Coupling eQV/h (Hz) that corresponds to a quadrupolar splitting nu_Q,
/// nu_Q = 6 e^2qQ / (4I(2I-1) h).
pub fn coupling_from_quad_freq(two_i: u32, quad_freq: f64) -> f64 {
    let ti = two_i as f64;
    ti * (ti - 1.0) * quad_freq / 3.0
}

/// C = (2 pi nu_Q)^2 / 10, valid for I = 7/2 and eta = 0.
pub fn quadrupolar_constant_simplified(quad_freq: f64) -> Result<QuadrupolarConstant> {
    if !(quad_freq.is_finite() && quad_freq > 0.0) {
        return Err(Error::InvalidArgument(format!("quadrupolar frequency must be positive, got {quad_freq}")));
    }
    let w = 2.0 * PI * quad_freq;
    Ok(QuadrupolarConstant { c: w * w / 10.0, provenance: Provenance::FromSimplified })
}

pub fn densities_from_fit(params: &FitScaleParams, c: &QuadrupolarConstant) -> Result<SpectralDensities> {
    if !(c.c > 0.0) {
        return Err(Error::InvalidArgument("C must be positive".into()));
    }
    SpectralDensities::new(params.b0 / c.c, params.b1 / c.c, params.b2 / c.c)
}
