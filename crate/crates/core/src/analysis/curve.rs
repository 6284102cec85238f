use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Seconds.
    pub t: f64,
    pub y: f64,
    pub sigma: Option<f64>,
}

/// Time series with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    samples: Vec<Sample>,
}

impl DecayCurve {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !s.t.is_finite() || !s.y.is_finite() {
                return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
            }
            if let Some(sig) = s.sigma {
                if !(sig > 0.0 && sig.is_finite()) {
                    return Err(Error::InvalidArgument(format!("sample {i} has non-positive sigma {sig}")));
                }
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidArgument(format!("times not strictly increasing at sample {}", i + 1)));
        }
        Ok(Self { samples })
    }

    pub fn from_xy(t: &[f64], y: &[f64]) -> Result<Self> {
        if t.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), found: y.len() });
        }
        Self::new(t.iter().zip(y).map(|(t, y)| Sample { t: *t, y: *y, sigma: None }).collect())
    }

    pub fn with_sigma(t: &[f64], y: &[f64], sigma: &[f64]) -> Result<Self> {
        if t.len() != y.len() || t.len() != sigma.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), found: y.len().min(sigma.len()) });
        }
        Self::new((0..t.len()).map(|i| Sample { t: t[i], y: y[i], sigma: Some(sigma[i]) }).collect())
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y).collect()
    }

    /// Per-sample sigmas when every sample carries one.
    pub fn sigmas(&self) -> Option<Vec<f64>> {
        self.samples.iter().map(|s| s.sigma).collect()
    }

    /// Divides amplitudes (and sigmas) by the largest |amplitude|.
    pub fn normalized(&self) -> Result<Self> {
        let peak = self.samples.iter().map(|s| s.y.abs()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize an all-zero curve".into()));
        }
        Ok(Self {
            samples: self
                .samples
                .iter()
                .map(|s| Sample { t: s.t, y: s.y / peak, sigma: s.sigma.map(|x| x / peak) })
                .collect(),
        })
    }

    pub(crate) fn require(&self, min: usize) -> Result<()> {
        if self.len() < min {
            return Err(Error::InvalidArgument(format!("curve has {} samples, at least {min} needed", self.len())));
        }
        Ok(())
    }
}
