use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::curve::DecayCurve;
use crate::error::{Error, Result};

/// Single-sided magnitude spectrum; bin k sits at k / (N dt).
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// True when the residuals were interpolated onto a uniform grid first.
    pub resampled: bool,
}

impl AmplitudeSpectrum {
    pub fn bin_width(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// Strongest non-DC bin as (frequency, magnitude).
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.magnitudes
            .iter()
            .enumerate()
            .skip(1)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, m)| (self.frequencies[i], *m))
    }
}

fn interpolate(t: &[f64], y: &[f64], at: f64) -> f64 {
    let k = t.partition_point(|x| *x <= at).clamp(1, t.len() - 1);
    let (t0, t1) = (t[k - 1], t[k]);
    y[k - 1] + (y[k] - y[k - 1]) * (at - t0) / (t1 - t0)
}

/// Magnitude spectrum of data minus model.
///
/// Both curves must share their sample times. Residuals on a non-uniform
/// grid are linearly interpolated onto N equally spaced points over the same
/// span. Magnitudes are 2|X_k|/N, so a sinusoid of amplitude a on a bin
/// centre shows up as a (DC and Nyquist use 1/N).
pub fn residual_spectrum(curve: &DecayCurve, model_curve: &DecayCurve) -> Result<AmplitudeSpectrum> {
    let n = curve.len();
    if n < 8 {
        return Err(Error::InvalidArgument(format!("spectrum needs at least 8 samples, got {n}")));
    }
    if model_curve.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: model_curve.len() });
    }
    let t = curve.times();
    let span = t[n - 1] - t[0];
    for (a, b) in t.iter().zip(model_curve.times()) {
        if (a - b).abs() > 1e-9 * span {
            return Err(Error::InvalidArgument(format!("model time {b} does not match data time {a}")));
        }
    }
    let r: Vec<f64> = curve.values().iter().zip(model_curve.values()).map(|(y, m)| y - m).collect();
    let dt = span / (n - 1) as f64;
    let uniform = t.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt);
    let samples: Vec<f64> =
        if uniform { r } else { (0..n).map(|k| interpolate(&t, &r, t[0] + dt * k as f64)).collect() };

    let mut buf: Vec<Complex<f64>> = samples.iter().map(|x| Complex::new(*x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let magnitudes = (0..=half)
        .map(|k| {
            let edge = k == 0 || (n % 2 == 0 && k == half);
            buf[k].norm() * if edge { 1.0 } else { 2.0 } / n as f64
        })
        .collect();
    let frequencies = (0..=half).map(|k| k as f64 / (n as f64 * dt)).collect();
    Ok(AmplitudeSpectrum { frequencies, magnitudes, resampled: !uniform })
}
