//! Curve fitting and relaxation-time diagnostics.

mod bloch;
mod curve;
mod ilt;
mod joint_fit;
mod simplex;
mod spectrum;

pub use bloch::{fit_bloch_longitudinal, fit_bloch_transverse, BlochLongitudinal, BlochTransverse};
pub use curve::{DecayCurve, Sample};
pub use ilt::{ilt, nnls, GridSpec, Kernel, TimeDistribution};
pub use joint_fit::{
    fit_redfield_joint, joint_models, FitParams, FitResult, JointFitInputs, JointFitOptions, PARAM_NAMES,
};
pub use simplex::{nelder_mead_minimize, Minimum, NelderMeadOptions, Termination};
pub use spectrum::{residual_spectrum, AmplitudeSpectrum};
