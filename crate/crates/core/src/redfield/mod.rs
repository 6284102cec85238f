//! Secular Redfield relaxation superoperator for the quadrupolar mechanism,
//! split into coherence-order blocks.
//!
//! Block `q` acts on the elements rho_{q+n, n}, n = 0..d-q (0-based), and
//! the relaxation equation reads d/dt rho = C * block * rho.

mod analytic;
mod eigen;
pub mod tables;

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::phys_params::SpectralDensities;
use crate::spin_algebra::{make_quadrupole_operators, QuadrupoleSet, SpinSystem};

pub use analytic::{analytic_eigensystem, analytic_eigenvalues};
pub use eigen::{numeric_eigensystem, BlockEigensystem};
pub use tables::{validate_against_tables, ReferenceTables, ValidationReport};

/// Relaxation matrix of one coherence order, evaluated at given densities.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceBlock {
    pub q: usize,
    pub matrix: DMatrix<f64>,
}

impl CoherenceBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Unit-density Liouvillians with the global normalization applied.
///
/// The superoperator is linear in (J0, J1, J2), so each block is stored as
/// three matrices and evaluated by linear combination.
#[derive(Debug, Clone)]
pub struct RelaxationModel {
    dim: usize,
    kappa: f64,
    liouvillians: [DMatrix<f64>; 3],
    blocks: Vec<[DMatrix<f64>; 3]>,
}

impl RelaxationModel {
    pub fn new(quads: &QuadrupoleSet) -> Result<Self> {
        let d = quads.dim();
        let raw = [0, 1, 2].map(|k| raw_liouvillian(quads, k));
        let e7 = |k: usize| raw[k][(d * (d - 1), d * (d - 1))];
        // The q = 7 element is -21 J1 - 7 J2 in table units.
        let kappa = -21.0 / e7(1);
        let j2 = kappa * e7(2);
        let j0 = kappa * e7(0);
        if !(kappa.is_finite() && kappa > 0.0) || (j2 + 7.0).abs() > 1e-10 || j0.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "normalization check failed: kappa = {kappa}, J2 coefficient {j2}, J0 coefficient {j0}"
            )));
        }
        let liouvillians = raw.map(|m| m * kappa);
        let blocks = (0..d)
            .map(|q| [0, 1, 2].map(|k| extract_block(&liouvillians[k], d, q)))
            .collect();
        Ok(Self { dim: d, kappa, liouvillians, blocks })
    }

    /// Shared model for spin 7/2.
    pub fn spin_seven_halves() -> &'static RelaxationModel {
        static MODEL: OnceLock<RelaxationModel> = OnceLock::new();
        MODEL.get_or_init(|| {
            let quads = make_quadrupole_operators(SpinSystem::seven_halves()).expect("spin 7/2 is supported");
            RelaxationModel::new(&quads).expect("spin 7/2 normalization")
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Scale applied to the raw double-commutator superoperator.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Block of order `q` for arbitrary (possibly non-physical) weights.
    pub fn block_matrix(&self, q: usize, j: [f64; 3]) -> Result<DMatrix<f64>> {
        let parts = self.blocks.get(q).ok_or(Error::CoherenceOrder(q as i32))?;
        Ok(&parts[0] * j[0] + &parts[1] * j[1] + &parts[2] * j[2])
    }

    pub fn block(&self, q: usize, j: &SpectralDensities) -> Result<CoherenceBlock> {
        Ok(CoherenceBlock { q, matrix: self.block_matrix(q, j.as_array())? })
    }

    /// Full d^2 x d^2 matrix acting on row-major vec(rho).
    pub fn liouville_matrix(&self, j: &SpectralDensities) -> DMatrix<f64> {
        &self.liouvillians[0] * j.j0 + &self.liouvillians[1] * j.j1 + &self.liouvillians[2] * j.j2
    }
}

pub fn assemble_block(q: usize, quads: &QuadrupoleSet, j: &SpectralDensities) -> Result<CoherenceBlock> {
    if q >= quads.dim() {
        return Err(Error::CoherenceOrder(q as i32));
    }
    RelaxationModel::new(quads)?.block(q, j)
}

/// Coherence order of the row-major vec index `idx`.
pub fn coherence_of(idx: usize, dim: usize) -> i32 {
    (idx / dim) as i32 - (idx % dim) as i32
}

/// -sum_{|p| = k} (-1)^p [Q_p, [Q_{-p}, .]] as a real d^2 x d^2 matrix.
fn raw_liouvillian(quads: &QuadrupoleSet, k: usize) -> DMatrix<f64> {
    let d = quads.dim();
    let ps: Vec<i32> = if k == 0 { vec![0] } else { vec![-(k as i32), k as i32] };
    let re = |p: i32| quads.get(p).real_part();
    let pairs: Vec<(f64, DMatrix<f64>, DMatrix<f64>)> =
        ps.iter().map(|&p| (if p % 2 == 0 { 1.0 } else { -1.0 }, re(p), re(-p))).collect();
    let comm = |a: &DMatrix<f64>, b: &DMatrix<f64>| a * b - b * a;
    let mut out = DMatrix::zeros(d * d, d * d);
    for col in 0..d * d {
        let mut e = DMatrix::zeros(d, d);
        e[(col / d, col % d)] = 1.0;
        let mut acc = DMatrix::<f64>::zeros(d, d);
        for (sign, qp, qm) in &pairs {
            acc -= comm(qp, &comm(qm, &e)) * *sign;
        }
        for r in 0..d {
            for c in 0..d {
                out[(r * d + c, col)] = acc[(r, c)];
            }
        }
    }
    out
}

fn extract_block(l: &DMatrix<f64>, d: usize, q: usize) -> DMatrix<f64> {
    let n = d - q;
    DMatrix::from_fn(n, n, |i, j| l[((q + i) * d + i, (q + j) * d + j)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> &'static RelaxationModel {
        RelaxationModel::spin_seven_halves()
    }

    fn j(a: f64, b: f64, c: f64) -> SpectralDensities {
        SpectralDensities::new(a, b, c).unwrap()
    }

    #[test]
    fn kappa_is_one_over_36() {
        assert!((model().kappa() - 1.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn q7_scalar() {
        let b = model().block(7, &j(2.0, 3.0, 5.0)).unwrap();
        assert_eq!(b.dim(), 1);
        assert!((b.matrix[(0, 0)] - (-21.0 * 3.0 - 7.0 * 5.0)).abs() < 1e-12);
    }

    #[test]
    fn q6_block() {
        let (j0, j1, j2) = (1.3, 0.7, 0.2);
        let b = model().block(6, &j(j0, j1, j2)).unwrap().matrix;
        let diag = -9.0 * j0 - 29.0 * j1 - 11.0 * j2;
        assert!((b[(0, 0)] - diag).abs() < 1e-12);
        assert!((b[(1, 1)] - diag).abs() < 1e-12);
        assert!((b[(0, 1)] + 21.0 * j1).abs() < 1e-12);
        assert!((b[(1, 0)] + 21.0 * j1).abs() < 1e-12);
    }

    #[test]
    fn q0_population_conservation() {
        let b = model().block(0, &j(1.3, 0.7, 0.2)).unwrap().matrix;
        for c in 0..8 {
            assert!(b.column(c).sum().abs() < 1e-12);
        }
    }

    #[test]
    fn dimensions() {
        for q in 0..8 {
            assert_eq!(model().block(q, &j(1.0, 1.0, 1.0)).unwrap().dim(), 8 - q);
        }
        assert!(matches!(model().block(8, &j(1.0, 1.0, 1.0)), Err(Error::CoherenceOrder(8))));
    }

    #[test]
    fn assemble_from_quadrupoles() {
        let quads = make_quadrupole_operators(SpinSystem::seven_halves()).unwrap();
        let b = assemble_block(5, &quads, &j(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(b, model().block(5, &j(1.0, 2.0, 3.0)).unwrap());
        assert!(assemble_block(9, &quads, &j(1.0, 2.0, 3.0)).is_err());
    }
}
