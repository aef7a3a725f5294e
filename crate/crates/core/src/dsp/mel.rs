//! HTK-scale triangular mel filterbank.
//!
//! Filter edges are spaced uniformly on `2595·log10(1 + f/700)` between 0 Hz
//! and Nyquist, then snapped to the nearest DFT bin. Each filter rises
//! linearly from its lower edge to 1.0 at its centre bin and falls back to
//! zero at its upper edge, which is the next filter's centre.

use super::{Matrix, ScaleConfig};
use crate::error::{Error, Result};

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

#[derive(Debug, Clone)]
struct Triangle {
    /// First bin with a possibly non-zero weight.
    start: usize,
    weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MelFilterbank {
    filters: Vec<Triangle>,
    /// Edge bins, `bands + 2` of them; filter k has centre `edges[k + 1]`.
    edges: Vec<usize>,
    bins: usize,
    sample_rate: u32,
}

impl MelFilterbank {
    pub fn new(bands: usize, fft_size: usize, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if bands == 0 || fft_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "cannot build {bands} mel bands over a {fft_size}-point FFT"
            )));
        }
        let bins = fft_size / 2 + 1;
        let nyquist = f64::from(sample_rate) / 2.0;
        let top = hz_to_mel(nyquist);
        let edges: Vec<usize> = (0..bands + 2)
            .map(|i| {
                let hz = mel_to_hz(top * i as f64 / (bands + 1) as f64);
                ((hz * fft_size as f64 / f64::from(sample_rate)).round() as usize).min(bins - 1)
            })
            .collect();

        for k in 1..bands {
            if edges[k] >= edges[k + 1] {
                return Err(Error::DegenerateBands {
                    lower: k - 1,
                    upper: k,
                    bin: edges[k + 1],
                });
            }
        }
        let filters = (0..bands)
            .map(|k| {
                let (lo, centre, hi) = (edges[k], edges[k + 1], edges[k + 2]);
                let weights = (lo..=hi)
                    .map(|b| {
                        if b == centre {
                            1.0
                        } else if b < centre {
                            (b - lo) as f64 / (centre - lo) as f64
                        } else {
                            (hi - b) as f64 / (hi - centre) as f64
                        }
                    })
                    .collect();
                Triangle { start: lo, weights }
            })
            .collect();

        Ok(MelFilterbank {
            filters,
            edges,
            bins,
            sample_rate,
        })
    }

    pub fn bands(&self) -> usize {
        self.filters.len()
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Centre bin of filter `k`.
    pub fn centre_bin(&self, k: usize) -> usize {
        self.edges[k + 1]
    }

    /// Applies the filterbank to one spectrum column.
    pub fn apply(&self, spectrum: &[f64], out: &mut [f64]) {
        debug_assert_eq!(spectrum.len(), self.bins);
        for (o, tri) in out.iter_mut().zip(&self.filters) {
            *o = tri
                .weights
                .iter()
                .zip(&spectrum[tri.start..])
                .map(|(w, s)| w * s)
                .sum();
        }
    }

    /// Dense `bands × bins` transformation matrix.
    pub fn matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.bands(), self.bins);
        for (k, tri) in self.filters.iter().enumerate() {
            for (i, &w) in tri.weights.iter().enumerate() {
                m[(k, tri.start + i)] = w;
            }
        }
        m
    }
}

/// Builds the mel filterbank described by `cfg` at `sample_rate`.
pub fn build_mel_filterbank(cfg: &ScaleConfig, sample_rate: u32) -> Result<MelFilterbank> {
    MelFilterbank::new(cfg.mel_bands, cfg.fft_size, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_formula_round_trip() {
        for hz in [0.0, 27.5, 440.0, 1000.0, 22050.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(700.0) - 2595.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn shape_for_default_scale() {
        let fb = build_mel_filterbank(&ScaleConfig::default(), 44100).unwrap();
        assert_eq!(fb.matrix().shape(), (80, 1025));
    }

    #[test]
    fn rows_are_unit_peak_triangles() {
        let fb = build_mel_filterbank(&ScaleConfig::default(), 44100).unwrap();
        let m = fb.matrix();
        for k in 0..fb.bands() {
            let row = m.row(k);
            assert!(row.iter().all(|&w| w >= 0.0));
            assert_eq!(row.iter().cloned().fold(0.0, f64::max), 1.0);
            assert_eq!(row[fb.centre_bin(k)], 1.0);
        }
    }

    #[test]
    fn tone_at_centre_excites_only_neighbouring_filters() {
        let fb = build_mel_filterbank(&ScaleConfig::default(), 44100).unwrap();
        let mut spectrum = vec![0.0; fb.bins()];
        let mut out = vec![0.0; fb.bands()];
        for k in [2, 10, 40, 77] {
            spectrum.fill(0.0);
            spectrum[fb.centre_bin(k)] = 1.0;
            fb.apply(&spectrum, &mut out);
            assert_eq!(out[k], 1.0);
            assert_eq!(out[k - 2], 0.0);
            assert_eq!(out[k + 2], 0.0);
        }
    }

    #[test]
    fn collapsed_centres_are_degenerate() {
        let err = MelFilterbank::new(80, 256, 44100).unwrap_err();
        assert_eq!(err.kind(), "DegenerateBands");
    }

    #[test]
    fn zero_rate_rejected() {
        assert!(MelFilterbank::new(80, 2048, 0).is_err());
    }
}
