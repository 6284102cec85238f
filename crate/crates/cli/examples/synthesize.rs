//! Regenerates the bundled synthetic curves in `data/`.
//!
//!     cargo run -p quadrelax-cli --example synthesize -- crates/cli/data

use std::fmt::Write as _;
use std::path::PathBuf;

use quadrelax::analysis::{joint_models, FitParams, JointFitInputs};
use quadrelax::evolution::EquilibriumPolarization;
use quadrelax::quadrupolar_constant_simplified;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const SIGMA: f64 = 0.01;

fn write_curve(path: PathBuf, note: &str, t: &[f64], f: impl Fn(f64) -> f64, rng: &mut ChaCha8Rng) {
    let noise = Normal::new(0.0, SIGMA).unwrap();
    let mut s = String::new();
    writeln!(s, "# {note}").unwrap();
    writeln!(s, "t_seconds,amplitude,sigma").unwrap();
    for &x in t {
        writeln!(s, "{x:e},{:e},{SIGMA:e}", f(x) + noise.sample(rng)).unwrap();
    }
    std::fs::write(&path, s).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let truth = FitParams { a1z: 0.0230, a2z: 1.00, a1x: 0.019, a2x: 0.99, b0: 83.0, b1: 3.8, b2: 0.18 };
    let inputs = JointFitInputs {
        equilibrium: EquilibriumPolarization::HighTemperature,
        c: quadrupolar_constant_simplified(5969.0).unwrap(),
    };
    let (mz, mx) = joint_models(&truth, &inputs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let tz: Vec<f64> = (0..24).map(|k| 1e-3 * 2000f64.powf(k as f64 / 23.0)).collect();
    let tx: Vec<f64> = (1..=265).map(|n| n as f64 / 5969.0).collect();
    let note = "synthetic, B = (83, 3.8, 0.18) Hz, nu_Q = 5969 Hz, gaussian noise sigma 0.01, seed 20";
    write_curve(dir.join("long.csv"), &format!("inversion recovery, {note}"), &tz, |t| mz.value(t), &mut rng);
    write_curve(dir.join("trans.csv"), &format!("echo decay, {note}"), &tx, |t| mx.value(t), &mut rng);
}
