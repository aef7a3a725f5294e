use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    /// Periodic Hann window, `0.5 - 0.5 cos(2πn/N)`.
    #[default]
    Hann,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
                .collect(),
        }
    }
}

/// Analysis parameters of one spectral scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleConfig {
    pub fft_size: usize,
    pub hop_size: usize,
    pub window: Window,
    /// Number of mel bands.
    pub mel_bands: usize,
    /// Number of cepstral coefficients kept by the lifter.
    pub lifter_order: usize,
    /// Exponent applied to the STFT magnitude before the mel projection.
    pub power: f64,
    /// Added to mel energies before the natural log.
    pub log_floor: f64,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig {
            fft_size: 2048,
            hop_size: 512,
            window: Window::Hann,
            mel_bands: 80,
            lifter_order: 13,
            power: 1.0,
            log_floor: 1e-5,
        }
    }
}

impl ScaleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.fft_size.is_power_of_two() || self.fft_size < 2 {
            return bad(format!("fft_size {} is not a power of two", self.fft_size));
        }
        if self.hop_size == 0 || self.hop_size > self.fft_size {
            return bad(format!(
                "hop_size {} must lie in 1..={}",
                self.hop_size, self.fft_size
            ));
        }
        if self.mel_bands == 0 {
            return bad("mel_bands must be positive".into());
        }
        if self.lifter_order == 0 || self.lifter_order > self.mel_bands {
            return bad(format!(
                "lifter_order {} must lie in 1..={}",
                self.lifter_order, self.mel_bands
            ));
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return bad(format!("power {} must be positive", self.power));
        }
        if !(self.log_floor.is_finite() && self.log_floor > 0.0) {
            return bad(format!("log_floor {} must be positive", self.log_floor));
        }
        Ok(())
    }

    /// Number of non-negative frequency bins.
    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Frames produced for a signal of `len` samples, without padding.
    pub fn frame_count(&self, len: usize) -> Option<usize> {
        (len >= self.fft_size).then(|| (len - self.fft_size) / self.hop_size + 1)
    }
}
