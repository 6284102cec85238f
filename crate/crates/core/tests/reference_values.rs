//! Reference numbers and independently computed values.

use nalgebra::DMatrix;
use quadrelax::analysis::{fit_bloch_longitudinal, fit_bloch_transverse, joint_models, FitParams, JointFitInputs};
use quadrelax::evolution::{EquilibriumPolarization, EquilibriumState, DensityState, Propagator};
use quadrelax::{
    lorentzian_spectral_densities, numeric_eigensystem, quadrupolar_constant_simplified, RelaxationModel,
    SpectralDensities, SpinSystem,
};

fn rounded_j() -> SpectralDensities {
    SpectralDensities::new(8.2e-9, 3.3e-9, 1.2e-9).unwrap()
}

fn source_j() -> SpectralDensities {
    lorentzian_spectral_densities(47.24e6, 4.1e-9).unwrap()
}

fn rates(q: usize, j: &SpectralDensities) -> Vec<f64> {
    let c = quadrupolar_constant_simplified(266e3).unwrap();
    numeric_eigensystem(&RelaxationModel::spin_seven_halves().block(q, j).unwrap(), &c).unwrap().rates
}

fn fit_reference_params() -> FitParams {
    FitParams { a1z: 0.0230, a2z: 1.00, a1x: 0.019, a2x: 0.99, b0: 83.0, b1: 3.8, b2: 0.18 }
}

fn fit_reference_inputs() -> JointFitInputs {
    JointFitInputs {
        equilibrium: EquilibriumPolarization::HighTemperature,
        c: quadrupolar_constant_simplified(5969.0).unwrap(),
    }
}

#[test]
fn population_rates_at_source_densities() {
    let expected = [0.0, 4.13e3, 14.82e3, 15.85e3, 28.32e3, 34.04e3, 56.41e3, 56.98e3];
    for (r, e) in rates(0, &source_j()).iter().zip(expected) {
        if e == 0.0 {
            assert_eq!(*r, 0.0);
        } else {
            assert!((r / e - 1.0).abs() < 5e-3, "{r} vs {e}");
        }
    }
}

#[test]
fn rounded_densities_shift_population_rates_by_under_one_percent() {
    // rounding J to two digits moves the slowest mode by about 0.95 %
    let r = rates(0, &rounded_j());
    assert!((r[1] / 4.13e3 - 1.0).abs() < 1e-2);
}

#[test]
fn quintuple_quantum_rate() {
    let r = rates(7, &source_j());
    assert_eq!(r.len(), 1);
    assert!((r[0] / 21.69e3 - 1.0).abs() < 1e-3);
    let rr = rates(7, &rounded_j());
    assert!((rr[0] / 21.69e3 - 1.0).abs() < 1e-3);
}

#[test]
fn lorentzian_triple() {
    let j = source_j();
    for (x, e) in j.as_array().iter().zip([8.2e-9, 3.3e-9, 1.2e-9]) {
        assert!((x / e - 1.0).abs() < 0.02);
    }
}

#[test]
fn longitudinal_modes_at_fit_parameters() {
    let (mz, _) = joint_models(&fit_reference_params(), &fit_reference_inputs()).unwrap();
    let mut modes: Vec<(f64, f64)> = mz
        .rates
        .iter()
        .zip(mz.scaled_amplitudes())
        .filter(|(_, a)| a.abs() > 1e-6)
        .map(|(r, a)| (1e3 / r, 1e3 * a))
        .collect();
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let expected = [(4.6, -2.6), (11.5, -67.0), (38.0, -223.0), (310.0, -1672.0)];
    assert_eq!(modes.len(), 4);
    for ((t, a), (te, ae)) in modes.iter().zip(expected) {
        assert!((t / te - 1.0).abs() < 0.05, "{t} ms vs {te} ms");
        assert!((a / ae - 1.0).abs() < 0.05, "{a} vs {ae}");
    }
}

#[test]
fn transverse_modes_at_fit_parameters() {
    let (_, mx) = joint_models(&fit_reference_params(), &fit_reference_inputs()).unwrap();
    let mut modes: Vec<(f64, f64)> = mx
        .rates
        .iter()
        .zip(mx.scaled_amplitudes())
        .filter(|(_, a)| a.abs() > 1e-6)
        .map(|(r, a)| (1e3 / r, 1e3 * a))
        .collect();
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    // mode times and amplitudes from a direct eigen-decomposition oracle
    let expected = [(1.149, 80.63), (2.281, 213.22), (7.657, 339.97), (39.601, 156.20)];
    assert_eq!(modes.len(), 4);
    for ((t, a), (te, ae)) in modes.iter().zip(expected) {
        assert!((t / te - 1.0).abs() < 1e-3, "{t} ms vs {te} ms");
        assert!((a / ae - 1.0).abs() < 1e-3, "{a} vs {ae}");
    }
}

#[test]
fn transverse_amplitudes_follow_prepared_state() {
    // sum of modes at t = 0 is A1x * A2x * tr(Ix^2) with tr(Ix^2) = 42
    let (_, mx) = joint_models(&fit_reference_params(), &fit_reference_inputs()).unwrap();
    let total: f64 = mx.scaled_amplitudes().iter().sum();
    assert!((total - 0.019 * 0.99 * 42.0).abs() < 1e-12);
}

#[test]
fn fit_densities_from_scale_parameters() {
    let c = quadrupolar_constant_simplified(5969.0).unwrap();
    let j = quadrelax::densities_from_fit(&fit_reference_params().scale_params().unwrap(), &c).unwrap();
    for (x, e) in j.as_array().iter().zip([590e-9, 27e-9, 1.28e-9]) {
        assert!((x / e - 1.0).abs() < 0.01, "{x} vs {e}");
    }
}

#[test]
fn noon_single_exponential_coherence() {
    let c = quadrupolar_constant_simplified(266e3).unwrap();
    let p = Propagator::new(RelaxationModel::spin_seven_halves(), &source_j(), &c).unwrap();
    let rho = DensityState::noon(SpinSystem::seven_halves());
    let eq = EquilibriumState::pure_top(8).unwrap();
    let traj = p.trajectory(&rho, &eq, &[46.1e-6]).unwrap();
    assert!((traj[0].get(7, 0).re - 0.1839).abs() < 2e-4);
}

#[test]
fn bloch_fits_on_relaxation_curves() {
    // mono-exponential fits of the multi-mode curves, frozen from an
    // independent Levenberg-Marquardt fit on the same sampling
    let (mz, mx) = joint_models(&fit_reference_params(), &fit_reference_inputs()).unwrap();
    let tz: Vec<f64> = (0..24).map(|k| 1e-3 * 2000f64.powf(k as f64 / 23.0)).collect();
    let tx: Vec<f64> = (1..=265).map(|n| n as f64 / 5969.0).collect();
    let long = quadrelax::evolution::longitudinal_signal(&mz, &tz).unwrap();
    let trans = quadrelax::evolution::transverse_signal(&mx, &tx).unwrap();
    let l = fit_bloch_longitudinal(&long).unwrap();
    assert!((l.t1 / 0.24177316 - 1.0).abs() < 1e-5, "T1 = {}", l.t1);
    assert!((l.a0 / 0.01045654 - 1.0).abs() < 1e-4);
    assert!((l.a1 / 0.91103092 - 1.0).abs() < 1e-5);
    let x = fit_bloch_transverse(&trans).unwrap();
    assert!((x.t2 / 0.0121099 - 1.0).abs() < 1e-5, "T2 = {}", x.t2);
    assert!((x.a1 / 0.57973339 - 1.0).abs() < 1e-5);
}

#[test]
fn block_sizes() {
    let model = RelaxationModel::spin_seven_halves();
    for q in 0..8 {
        let b: DMatrix<f64> = model.block_matrix(q, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(b.nrows(), 8 - q);
    }
    assert!(model.block_matrix(8, [1.0, 1.0, 1.0]).is_err());
}
