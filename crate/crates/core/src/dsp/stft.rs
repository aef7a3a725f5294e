use std::sync::Arc;

use realfft::{RealFftPlanner, RealToComplex};

use super::{Matrix, ScaleConfig};
use crate::error::{Error, Result};

/// Windowed short-time magnitude spectrum with a fixed frame layout: frame
/// `t` covers samples `t·hop .. t·hop + fft_size`, no centre padding.
#[derive(Clone)]
pub struct Stft {
    fft: Arc<dyn RealToComplex<f64>>,
    window: Vec<f64>,
    hop: usize,
}

impl Stft {
    pub fn new(cfg: &ScaleConfig) -> Self {
        let fft = RealFftPlanner::<f64>::new().plan_fft_forward(cfg.fft_size);
        Stft {
            fft,
            window: cfg.window.coefficients(cfg.fft_size),
            hop: cfg.hop_size,
        }
    }

    pub fn fft_size(&self) -> usize {
        self.window.len()
    }

    pub fn bins(&self) -> usize {
        self.window.len() / 2 + 1
    }

    pub fn frame_count(&self, len: usize) -> Result<usize> {
        let n = self.fft_size();
        if len < n {
            return Err(Error::TooShort {
                key: None,
                len,
                needed: n,
            });
        }
        Ok((len - n) / self.hop + 1)
    }

    /// Calls `f(t, magnitudes)` for every frame in order.
    pub fn for_each_frame(&self, x: &[f64], mut f: impl FnMut(usize, &[f64])) -> Result<()> {
        let frames = self.frame_count(x.len())?;
        let n = self.fft_size();
        let mut input = self.fft.make_input_vec();
        let mut spectrum = self.fft.make_output_vec();
        let mut scratch = self.fft.make_scratch_vec();
        let mut mags = vec![0.0; self.bins()];
        for t in 0..frames {
            let start = t * self.hop;
            for ((dst, &s), &w) in input.iter_mut().zip(&x[start..start + n]).zip(&self.window) {
                *dst = s * w;
            }
            self.fft
                .process_with_scratch(&mut input, &mut spectrum, &mut scratch)
                .expect("buffer sizes come from the plan");
            for (m, c) in mags.iter_mut().zip(&spectrum) {
                *m = c.norm();
            }
            f(t, &mags);
        }
        Ok(())
    }

    /// Full magnitude matrix, `(fft_size/2 + 1) × T`.
    pub fn magnitude(&self, x: &[f64]) -> Result<Matrix> {
        let frames = self.frame_count(x.len())?;
        let mut out = Matrix::zeros(self.bins(), frames);
        self.for_each_frame(x, |t, mags| {
            for (k, &m) in mags.iter().enumerate() {
                out[(k, t)] = m;
            }
        })?;
        Ok(out)
    }
}

/// Magnitude STFT of `x` under `cfg`.
pub fn stft_magnitude(x: &[f64], cfg: &ScaleConfig) -> Result<Matrix> {
    cfg.validate()?;
    Stft::new(cfg).magnitude(x)
}
