use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled complex envelope.
///
/// `center_freq` is bookkeeping only: the spectral position that sample
/// frequency zero corresponds to (0 for true baseband).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub center_freq: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, center_freq: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::param("sample_rate", format!("{sample_rate} is not positive")));
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::param("samples", "contains NaN or infinite values"));
        }
        Ok(Self {
            samples,
            sample_rate,
            center_freq,
        })
    }

    /// Complex exponential at `offset` Hz from the envelope center.
    pub fn tone(offset: f64, amplitude: f64, len: usize, sample_rate: f64, center_freq: f64) -> Self {
        let w = 2.0 * std::f64::consts::PI * offset / sample_rate;
        let samples = (0..len)
            .map(|n| Complex64::from_polar(amplitude, w * n as f64))
            .collect();
        Self {
            samples,
            sample_rate,
            center_freq,
        }
    }

    pub fn zeros(len: usize, sample_rate: f64, center_freq: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            sample_rate,
            center_freq,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Mean power per sample.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn scaled(mut self, gain: Complex64) -> Self {
        self.samples.iter_mut().for_each(|s| *s *= gain);
        self
    }

    pub(crate) fn ensure_nonempty(&self) -> Result<()> {
        if self.samples.is_empty() {
            Err(Error::EmptySignal)
        } else {
            Ok(())
        }
    }

    pub(crate) fn same_grid(&self, other: &ComplexSignal) -> bool {
        self.sample_rate == other.sample_rate && self.center_freq == other.center_freq
    }
}
