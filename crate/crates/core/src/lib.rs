//! Quadrupolar Redfield relaxation for spin-7/2 nuclei.
//!
//! Builds the spin and quadrupole operators, assembles the secular
//! relaxation superoperator one coherence order at a time, diagonalizes the
//! blocks (numerically or in closed form), propagates density matrices, and
//! fits relaxation parameters to measured decay curves.

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod phys_params;
pub mod redfield;
pub mod spin_algebra;

pub use error::{Error, Result};
pub use phys_params::{
    densities_from_fit, lorentzian_spectral_densities, quadrupolar_constant_full, quadrupolar_constant_simplified,
    FitScaleParams, Provenance, QuadrupolarConstant, SpectralDensities,
};
pub use redfield::{
    analytic_eigensystem, analytic_eigenvalues, assemble_block, numeric_eigensystem, validate_against_tables,
    BlockEigensystem, CoherenceBlock, RelaxationModel, ValidationReport,
};
pub use spin_algebra::{
    commutator, make_irreducible_tensor, make_quadrupole_operators, make_spin_operators, Operator, QuadrupoleSet,
    SpinOperators, SpinSystem,
};
