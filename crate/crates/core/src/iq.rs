//! Complex baseband sample stream.

use alloc::vec::Vec;
use num_complex::Complex64;

/// A sequence of complex baseband samples with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct IqStream {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl IqStream {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        IqStream { samples, sample_rate_hz }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean power over all samples.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Root-mean-square amplitude.
    pub fn rms(&self) -> f64 {
        libm::sqrt(self.mean_power())
    }
}

/// Mean power of a bare sample slice.
pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}
