//! YIN fundamental-frequency estimation and pitch-accuracy reporting.
//!
//! Per frame of `frame_size` samples the difference function is evaluated
//! over an integration window of `frame_size / 2` samples for lags
//! `0..=frame_size / 2`, normalized by its cumulative mean, thresholded, and
//! the winning lag is refined with a parabola through its neighbours.

use std::sync::Arc;

use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::{Instrument, SampleKey};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YinConfig {
    pub frame_size: usize,
    pub hop_size: usize,
    /// Absolute threshold on the cumulative-mean-normalized difference.
    pub threshold: f64,
    pub f_min: f64,
    pub f_max: f64,
}

impl Default for YinConfig {
    fn default() -> Self {
        YinConfig {
            frame_size: 4096,
            hop_size: 1024,
            threshold: 0.10,
            f_min: 25.0,
            f_max: 4400.0,
        }
    }
}

impl YinConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let rate = f64::from(sample_rate);
        if sample_rate == 0 {
            return bad("sample rate must be positive".into());
        }
        if self.hop_size == 0 {
            return bad("hop_size must be positive".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold {} must lie in (0, 1)", self.threshold));
        }
        if !(self.f_min > 0.0 && self.f_min < self.f_max && self.f_max < rate / 2.0) {
            return bad(format!(
                "need 0 < f_min ({}) < f_max ({}) < Nyquist ({})",
                self.f_min,
                self.f_max,
                rate / 2.0
            ));
        }
        if (self.frame_size as f64) < 2.0 * rate / self.f_min {
            return bad(format!(
                "frame_size {} holds fewer than two periods of {} Hz at {sample_rate} Hz",
                self.frame_size, self.f_min
            ));
        }
        Ok(())
    }
}

/// Reusable YIN state for one frame size.
pub struct Yin {
    cfg: YinConfig,
    rate: f64,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl Yin {
    pub fn new(cfg: &YinConfig, sample_rate: u32) -> Result<Self> {
        cfg.validate(sample_rate)?;
        let mut planner = RealFftPlanner::<f64>::new();
        Ok(Yin {
            cfg: *cfg,
            rate: f64::from(sample_rate),
            forward: planner.plan_fft_forward(cfg.frame_size),
            inverse: planner.plan_fft_inverse(cfg.frame_size),
        })
    }

    /// Difference function `d(τ) = Σ_{j<W} (x_j − x_{j+τ})²` for
    /// `τ = 0..=W`, `W = frame.len() / 2`, computed through one FFT
    /// cross-correlation.
    pub fn difference(&self, frame: &[f64]) -> Vec<f64> {
        let n = self.cfg.frame_size;
        assert_eq!(frame.len(), n);
        let w = n / 2;

        let mut head = self.forward.make_input_vec();
        head[..w].copy_from_slice(&frame[..w]);
        let mut full = frame.to_vec();
        let mut head_spec = self.forward.make_output_vec();
        let mut full_spec = self.forward.make_output_vec();
        self.forward
            .process(&mut head, &mut head_spec)
            .expect("plan sizes");
        self.forward
            .process(&mut full, &mut full_spec)
            .expect("plan sizes");
        for (h, f) in head_spec.iter_mut().zip(&full_spec) {
            *h = h.conj() * f;
        }
        // The imaginary parts of DC and Nyquist are zero up to rounding.
        head_spec[0].im = 0.0;
        head_spec[n / 2].im = 0.0;
        let mut corr = self.inverse.make_output_vec();
        self.inverse
            .process(&mut head_spec, &mut corr)
            .expect("plan sizes");
        let scale = 1.0 / n as f64;

        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &v in frame {
            acc += v * v;
            prefix.push(acc);
        }
        let energy = |start: usize| prefix[start + w] - prefix[start];
        let e0 = energy(0);
        (0..=w)
            .map(|tau| (e0 + energy(tau) - 2.0 * corr[tau] * scale).max(0.0))
            .collect()
    }

    /// Estimates the fundamental of one frame; `None` when unvoiced.
    pub fn frame_f0(&self, frame: &[f64]) -> Option<f64> {
        let d = self.difference(frame);
        let cmnd = cumulative_mean_normalized(&d);
        let w = d.len() - 1;
        let lo = ((self.rate / self.cfg.f_max).floor() as usize).max(2);
        let hi = ((self.rate / self.cfg.f_min).ceil() as usize).min(w - 1);

        // First dip of d' whose parabolic minimum falls under the threshold.
        let tau = (lo..=hi).find(|&t| {
            let (a, b, c) = (cmnd[t - 1], cmnd[t], cmnd[t + 1]);
            b <= a && b <= c && parabola(a, b, c).1 < self.cfg.threshold
        })?;
        let (shift, _) = parabola(d[tau - 1], d[tau], d[tau + 1]);
        Some(self.rate / (tau as f64 + shift))
    }

    /// Per-frame estimates over the whole signal.
    pub fn track(&self, x: &[f64]) -> Result<Vec<Option<f64>>> {
        let n = self.cfg.frame_size;
        if x.len() < n {
            return Err(Error::TooShort {
                key: None,
                len: x.len(),
                needed: n,
            });
        }
        let frames = (x.len() - n) / self.cfg.hop_size + 1;
        Ok((0..frames)
            .map(|t| {
                let start = t * self.cfg.hop_size;
                self.frame_f0(&x[start..start + n])
            })
            .collect())
    }
}

/// Vertex of the parabola through `(-1, a)`, `(0, b)`, `(1, c)` as
/// `(offset, value)`, offset clamped to one step; `(0, b)` when not convex.
fn parabola(a: f64, b: f64, c: f64) -> (f64, f64) {
    let curvature = a - 2.0 * b + c;
    if curvature > 0.0 {
        let offset = (0.5 * (a - c) / curvature).clamp(-1.0, 1.0);
        (offset, b - 0.25 * (a - c) * offset)
    } else {
        (0.0, b)
    }
}

/// `d'(0) = 1`, `d'(τ) = d(τ) · τ / Σ_{j=1..τ} d(j)`; lags with a zero
/// running sum map to 1.
pub fn cumulative_mean_normalized(d: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(d.len());
    out.push(1.0);
    let mut running = 0.0;
    for (tau, &v) in d.iter().enumerate().skip(1) {
        running += v;
        out.push(if running > 0.0 {
            v * tau as f64 / running
        } else {
            1.0
        });
    }
    out
}

/// Per-frame YIN estimates of `x`.
pub fn yin_f0(x: &[f64], sample_rate: u32, cfg: &YinConfig) -> Result<Vec<Option<f64>>> {
    Yin::new(cfg, sample_rate)?.track(x)
}

/// Median over voiced frames; the mean of the middle pair for even counts.
pub fn median_pitch(frames: &[Option<f64>]) -> Option<f64> {
    let voiced: Vec<f64> = frames.iter().flatten().copied().collect();
    median(voiced)
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

pub fn hz_to_midi(f0: f64) -> Result<f64> {
    if !f0.is_finite() || f0 <= 0.0 {
        return Err(Error::NonPositiveFrequency(f0));
    }
    Ok(69.0 + 12.0 * (f0 / 440.0).log2())
}

pub fn midi_to_hz(note: f64) -> f64 {
    440.0 * 2f64.powf((note - 69.0) / 12.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MadMode {
    /// Mean absolute deviation.
    #[default]
    MeanAbs,
    /// Median absolute deviation.
    MedianAbs,
}

impl MadMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MadMode::MeanAbs => "mean_abs",
            MadMode::MedianAbs => "median_abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePitch {
    pub key: SampleKey,
    pub f0_hz: Option<f64>,
    pub midi_est: Option<f64>,
    /// Estimated minus target pitch, semitones.
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchReport {
    pub per_sample: Vec<SamplePitch>,
    /// Semitones.
    pub mad: f64,
    pub mode: MadMode,
    pub voiced: usize,
    pub unvoiced: usize,
}

/// Median YIN pitch of every sample against its metadata pitch.
///
/// Unvoiced samples are counted but do not enter the aggregate.
pub fn mad_report(inst: &Instrument, cfg: &YinConfig, mode: MadMode) -> Result<PitchReport> {
    let yin = Yin::new(cfg, inst.sample_rate())?;
    let per_sample = inst
        .samples()
        .par_iter()
        .map(|sample| {
            let frames = yin.track(&sample.samples).map_err(|e| match e {
                Error::TooShort { len, needed, .. } => Error::TooShort {
                    key: Some(sample.key()),
                    len,
                    needed,
                },
                other => other,
            })?;
            let f0_hz = median_pitch(&frames);
            let midi_est = f0_hz.map(hz_to_midi).transpose()?;
            Ok(SamplePitch {
                key: sample.key(),
                f0_hz,
                midi_est,
                deviation: midi_est.map(|m| m - f64::from(sample.meta.pitch)),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let abs: Vec<f64> = per_sample
        .iter()
        .filter_map(|s| s.deviation.map(f64::abs))
        .collect();
    let voiced = abs.len();
    if voiced == 0 {
        return Err(Error::AllUnvoiced);
    }
    let mad = match mode {
        MadMode::MeanAbs => abs.iter().sum::<f64>() / voiced as f64,
        MadMode::MedianAbs => median(abs).expect("non-empty"),
    };
    Ok(PitchReport {
        unvoiced: per_sample.len() - voiced,
        per_sample,
        mad,
        mode,
        voiced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(f: f64, rate: u32, len: usize) -> Vec<f64> {
        (0..len)
            .map(|i| 0.5 * (2.0 * PI * f * i as f64 / f64::from(rate)).sin())
            .collect()
    }

    #[test]
    fn difference_matches_direct_sum() {
        let cfg = YinConfig {
            frame_size: 256,
            f_min: 400.0,
            ..YinConfig::default()
        };
        let yin = Yin::new(&cfg, 44100).unwrap();
        let frame: Vec<f64> = (0..256)
            .map(|i| ((i * 37 % 23) as f64 - 11.0) / 11.0)
            .collect();
        let fast = yin.difference(&frame);
        for (tau, &v) in fast.iter().enumerate() {
            let direct: f64 = (0..128).map(|j| (frame[j] - frame[j + tau]).powi(2)).sum();
            assert!((v - direct).abs() < 1e-9, "tau {tau}: {v} vs {direct}");
        }
    }

    #[test]
    fn a440_every_frame() {
        let frames = yin_f0(&sine(440.0, 44100, 44100), 44100, &YinConfig::default()).unwrap();
        assert_eq!(frames.len(), 40);
        for f in frames {
            let f = f.expect("voiced");
            assert!((f - 440.0).abs() < 0.5, "{f}");
        }
    }

    #[test]
    fn silence_is_unvoiced() {
        let frames = yin_f0(&vec![0.0; 20000], 44100, &YinConfig::default()).unwrap();
        assert!(frames.iter().all(Option::is_none));
        assert_eq!(median_pitch(&frames), None);
    }

    #[test]
    fn lowest_piano_key() {
        let frames = yin_f0(&sine(27.5, 44100, 44100), 44100, &YinConfig::default()).unwrap();
        for f in frames {
            let f = f.expect("voiced");
            assert!((f - 27.5).abs() < 0.2, "{f}");
        }
    }

    #[test]
    fn strong_second_harmonic_keeps_fundamental() {
        let rate = 44100;
        let x: Vec<f64> = (0..44100)
            .map(|i| {
                let t = i as f64 / f64::from(rate);
                0.4 * (2.0 * PI * 220.0 * t).sin() + 0.36 * (2.0 * PI * 440.0 * t).sin()
            })
            .collect();
        let f0 = median_pitch(&yin_f0(&x, rate, &YinConfig::default()).unwrap()).unwrap();
        assert!((hz_to_midi(f0).unwrap() - 57.0).abs() < 0.1);
    }

    #[test]
    fn too_short_and_bad_config() {
        let err = yin_f0(&[0.0; 100], 44100, &YinConfig::default()).unwrap_err();
        assert_eq!(err.kind(), "TooShort");
        let cfg = YinConfig {
            frame_size: 1024,
            ..YinConfig::default()
        };
        assert_eq!(
            yin_f0(&[0.0; 5000], 44100, &cfg).unwrap_err().kind(),
            "InvalidConfig"
        );
        let cfg = YinConfig {
            f_max: 30000.0,
            ..YinConfig::default()
        };
        assert!(cfg.validate(44100).is_err());
    }

    #[test]
    fn median_of_voiced_frames() {
        assert_eq!(
            median_pitch(&[Some(440.0), Some(440.0), Some(441.0), None]),
            Some(440.0)
        );
        assert_eq!(median_pitch(&[None, None]), None);
        assert_eq!(
            median_pitch(&[Some(100.0), Some(200.0), Some(300.0)]),
            Some(200.0)
        );
        assert_eq!(median_pitch(&[Some(100.0), Some(200.0)]), Some(150.0));
    }

    #[test]
    fn midi_conversion() {
        assert_eq!(hz_to_midi(440.0).unwrap(), 69.0);
        assert_eq!(hz_to_midi(880.0).unwrap(), 81.0);
        assert_eq!(hz_to_midi(27.5).unwrap(), 21.0);
        assert_eq!(hz_to_midi(0.0).unwrap_err().kind(), "NonPositiveFrequency");
        assert!(hz_to_midi(-3.0).is_err());
        for note in 21..=108 {
            let n = f64::from(note);
            assert!((hz_to_midi(midi_to_hz(n)).unwrap() - n).abs() < 1e-9);
        }
    }
}
