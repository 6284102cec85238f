//! Eigen-mode propagation against the matrix exponential of each block.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use quadrelax::evolution::{DensityState, EquilibriumState, Propagator};
use quadrelax::{lorentzian_spectral_densities, quadrupolar_constant_simplified, RelaxationModel, SpectralDensities, SpinSystem};

const C: f64 = 2.793e11;

fn random_state(raw: &[f64]) -> DensityState {
    let g = DMatrix::from_fn(8, 8, |r, c| Complex64::new(raw[2 * (8 * r + c)], raw[2 * (8 * r + c) + 1]));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let mut m = rho / tr;
    // exact Hermitian symmetry after the division
    m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityState::new(m).unwrap()
}

fn random_equilibrium(p: &[f64]) -> EquilibriumState {
    let s: f64 = p.iter().sum();
    EquilibriumState::from_populations(&p.iter().map(|x| x / s).collect::<Vec<_>>()).unwrap()
}

/// exp(C B t) applied to the block deviation, built without any eigen-decomposition.
fn expm_block(model: &RelaxationModel, j: &SpectralDensities, q: usize, rho0: &DensityState, eq: &EquilibriumState, t: f64) -> Vec<Complex64> {
    let b = model.block_matrix(q, j.as_array()).unwrap() * (C * t);
    let e = b.exp();
    let pops = eq.populations();
    let dev: Vec<Complex64> =
        rho0.coherence(q).iter().enumerate().map(|(n, x)| if q == 0 { x - pops[n] } else { *x }).collect();
    let v = DVector::from_vec(dev);
    let ec = e.map(|x| Complex64::new(x, 0.0));
    let out = ec * v;
    out.iter().enumerate().map(|(n, x)| if q == 0 { x + pops[n] } else { *x }).collect()
}

fn qc() -> quadrelax::QuadrupolarConstant {
    quadrelax::QuadrupolarConstant::user_supplied(C).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigen_sum_matches_matrix_exponential(
        j in (0.5f64..10.0, 0.5f64..10.0, 0.5f64..10.0),
        raw in prop::collection::vec(-1.0f64..1.0, 128),
        pops in prop::collection::vec(0.01f64..1.0, 8),
        t in 0.0f64..2e-4,
    ) {
        let j = SpectralDensities::new(j.0 * 1e-9, j.1 * 1e-9, j.2 * 1e-9).unwrap();
        let model = RelaxationModel::spin_seven_halves();
        let p = Propagator::new(model, &j, &qc()).unwrap();
        let rho0 = random_state(&raw);
        let eq = random_equilibrium(&pops);
        let state = &p.trajectory(&rho0, &eq, &[t]).unwrap()[0];
        for q in 0..8 {
            let oracle = expm_block(model, &j, q, &rho0, &eq, t);
            for (n, x) in oracle.iter().enumerate() {
                prop_assert!((state.element(q, n) - x).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn trajectories_stay_hermitian_with_unit_trace(
        j in (0.5f64..10.0, 0.5f64..10.0, 0.5f64..10.0),
        raw in prop::collection::vec(-1.0f64..1.0, 128),
        pops in prop::collection::vec(0.01f64..1.0, 8),
    ) {
        let j = SpectralDensities::new(j.0 * 1e-9, j.1 * 1e-9, j.2 * 1e-9).unwrap();
        let times: Vec<f64> = (0..20).map(|k| 1e-6 * 1.5f64.powi(k)).collect();
        let traj = quadrelax::evolution::propagate(&random_state(&raw), &random_equilibrium(&pops), &j, &qc(), &times).unwrap();
        for s in traj {
            prop_assert!(s.hermiticity_defect() < 1e-10);
            prop_assert!((s.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn deviation_dynamics_superpose(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        raw1 in prop::collection::vec(-1.0f64..1.0, 128),
        raw2 in prop::collection::vec(-1.0f64..1.0, 128),
        t in 0.0f64..1e-4,
    ) {
        let j = lorentzian_spectral_densities(47.24e6, 4.1e-9).unwrap();
        let p = Propagator::new(RelaxationModel::spin_seven_halves(), &j, &qc()).unwrap();
        let eq = EquilibriumState::uniform(8).unwrap();
        let (r1, r2) = (random_state(&raw1), random_state(&raw2));
        let ueq = eq.state().matrix().clone();
        // a (r1 - eq) + b (r2 - eq) + eq is unit trace and Hermitian
        let mixed = (r1.matrix() - &ueq) * Complex64::new(a, 0.0) + (r2.matrix() - &ueq) * Complex64::new(b, 0.0) + &ueq;
        let r3 = DensityState::new(mixed).unwrap();
        let s = p.trajectory(&r1, &eq, &[t]).unwrap().remove(0);
        let u = p.trajectory(&r2, &eq, &[t]).unwrap().remove(0);
        let w = p.trajectory(&r3, &eq, &[t]).unwrap().remove(0);
        let lhs = w.matrix() - &ueq;
        let rhs = (s.matrix() - &ueq) * Complex64::new(a, 0.0) + (u.matrix() - &ueq) * Complex64::new(b, 0.0);
        prop_assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-10));
    }
}

#[test]
fn noon_trajectory_shape() {
    let j = lorentzian_spectral_densities(47.24e6, 4.1e-9).unwrap();
    let c = quadrupolar_constant_simplified(266e3).unwrap();
    let p = Propagator::new(RelaxationModel::spin_seven_halves(), &j, &c).unwrap();
    let rho = DensityState::noon(SpinSystem::seven_halves());
    let eq = EquilibriumState::pure_top(8).unwrap();
    let times: Vec<f64> = (0..400).map(|k| k as f64 * 5e-6).collect();
    let traj = p.trajectory(&rho, &eq, &times).unwrap();

    let corner: Vec<f64> = traj.iter().map(|s| s.get(7, 0).norm()).collect();
    for w in corner.windows(2) {
        assert!(w[1] < w[0]);
    }
    let last = traj.last().unwrap();
    assert!(last.get(0, 0).re > 0.99);
    assert!(last.get(7, 7).re < 1e-3);
    assert!(last.get(7, 0).norm() < 1e-12);
    assert!((last.get(0, 7) - last.get(7, 0).conj()).norm() == 0.0);
    // the coherence decays faster than the slowest population mode (4.13 kHz)
    let slow = p.eigensystem(0).rates[1];
    assert!(p.eigensystem(7).rates[0] > slow);
    let k = 100;
    assert!(corner[k] / corner[0] < (-slow * times[k]).exp());
}
