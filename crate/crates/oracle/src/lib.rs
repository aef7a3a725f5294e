//! Slow, literal reference implementations of the instrument-eval metrics.
//!
//! Nothing here shares code with the production crate: the DFT is a direct
//! sum, the mel weights are evaluated from the formula per bin, and the
//! cepstral lifter is a forward and inverse cosine sum written out by
//! definition. Test suites compare the fast paths against these.

use std::f64::consts::PI;

/// Parameters of one analysis scale.
#[derive(Debug, Clone, Copy)]
pub struct RefScale {
    pub fft: usize,
    pub hop: usize,
    pub bands: usize,
    pub order: usize,
    pub power: f64,
    pub eps: f64,
}

impl Default for RefScale {
    fn default() -> Self {
        RefScale {
            fft: 2048,
            hop: 512,
            bands: 80,
            order: 13,
            power: 1.0,
            eps: 1e-5,
        }
    }
}

fn mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn inv_mel(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Magnitude of the direct DFT of one Hann-windowed frame, bins `0..=N/2`.
pub fn frame_spectrum(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    let windowed: Vec<f64> = frame
        .iter()
        .enumerate()
        .map(|(i, &v)| v * (0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()))
        .collect();
    let cos: Vec<f64> = (0..n)
        .map(|i| (2.0 * PI * i as f64 / n as f64).cos())
        .collect();
    let sin: Vec<f64> = (0..n)
        .map(|i| (2.0 * PI * i as f64 / n as f64).sin())
        .collect();
    (0..=n / 2)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (i, &v) in windowed.iter().enumerate() {
                let idx = (k * i) % n;
                re += v * cos[idx];
                im -= v * sin[idx];
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

/// Weight of mel band `band` at DFT bin `bin`.
pub fn mel_weight(band: usize, bin: usize, bands: usize, fft: usize, rate: f64) -> f64 {
    let top = mel(rate / 2.0);
    let edge = |i: usize| -> f64 {
        let hz = inv_mel(top * i as f64 / (bands + 1) as f64);
        (hz * fft as f64 / rate).round().min((fft / 2) as f64)
    };
    let (lo, centre, hi) = (edge(band), edge(band + 1), edge(band + 2));
    let b = bin as f64;
    if b == centre {
        1.0
    } else if b > lo && b < centre {
        (b - lo) / (centre - lo)
    } else if b > centre && b < hi {
        (hi - b) / (hi - centre)
    } else {
        0.0
    }
}

/// Row sums of the mel filterbank.
pub fn mel_row_sums(bands: usize, fft: usize, rate: f64) -> Vec<f64> {
    (0..bands)
        .map(|k| {
            (0..=fft / 2)
                .map(|b| mel_weight(k, b, bands, fft, rate))
                .sum()
        })
        .collect()
}

fn dct_coefficient(q: usize, n: usize, bands: usize) -> f64 {
    let scale = if q == 0 {
        1.0 / bands as f64
    } else {
        2.0 / bands as f64
    };
    scale.sqrt() * (PI * q as f64 * (n as f64 + 0.5) / bands as f64).cos()
}

/// Liftered log-mel feature, returned as `frames × bands`.
pub fn liftered_feature(x: &[f64], rate: f64, s: &RefScale, exclude_dc: bool) -> Vec<Vec<f64>> {
    let frames = (x.len() - s.fft) / s.hop + 1;
    let kept: Vec<usize> = if exclude_dc {
        (1..=s.order).filter(|&q| q < s.bands).collect()
    } else {
        (0..s.order).collect()
    };
    let weights: Vec<Vec<f64>> = (0..s.bands)
        .map(|k| {
            (0..=s.fft / 2)
                .map(|b| mel_weight(k, b, s.bands, s.fft, rate))
                .collect()
        })
        .collect();

    (0..frames)
        .map(|t| {
            let spec = frame_spectrum(&x[t * s.hop..t * s.hop + s.fft]);
            let log_mel: Vec<f64> = weights
                .iter()
                .map(|w| {
                    let e: f64 = w.iter().zip(&spec).map(|(a, m)| a * m.powf(s.power)).sum();
                    (e + s.eps).ln()
                })
                .collect();
            let cepstrum: Vec<(usize, f64)> = kept
                .iter()
                .map(|&q| {
                    let c: f64 = log_mel
                        .iter()
                        .enumerate()
                        .map(|(n, v)| dct_coefficient(q, n, s.bands) * v)
                        .sum();
                    (q, c)
                })
                .collect();
            (0..s.bands)
                .map(|n| {
                    cepstrum
                        .iter()
                        .map(|&(q, c)| dct_coefficient(q, n, s.bands) * c)
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// All-pairs, all-scales timbral consistency.
pub fn tc_reference(
    samples: &[Vec<f64>],
    rate: f64,
    scales: &[RefScale],
    mean: bool,
    exclude_dc: bool,
) -> f64 {
    let features: Vec<Vec<Vec<Vec<f64>>>> = samples
        .iter()
        .map(|x| {
            scales
                .iter()
                .map(|s| liftered_feature(x, rate, s, exclude_dc))
                .collect()
        })
        .collect();
    let k = samples.len();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..k {
        for j in i + 1..k {
            pairs += 1;
            for s in 0..scales.len() {
                let (a, b) = (&features[i][s], &features[j][s]);
                let mut l1 = 0.0;
                let mut count = 0usize;
                for (fa, fb) in a.iter().zip(b) {
                    for (va, vb) in fa.iter().zip(fb) {
                        l1 += (va - vb).abs();
                        count += 1;
                    }
                }
                total += if mean { l1 / count as f64 } else { l1 };
            }
        }
    }
    if mean {
        total / pairs as f64
    } else {
        total
    }
}

/// YIN difference function by direct summation, `τ = 0..=N/2`.
pub fn yin_difference(frame: &[f64]) -> Vec<f64> {
    let w = frame.len() / 2;
    (0..=w)
        .map(|tau| (0..w).map(|j| (frame[j] - frame[j + tau]).powi(2)).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_of_constant_is_dc_only() {
        let spec = frame_spectrum(&[1.0; 64]);
        // Sum of a periodic Hann window of length N is N/2.
        assert!((spec[0] - 32.0).abs() < 1e-9);
        assert!((spec[1] - 16.0).abs() < 1e-9);
        assert!(spec[5].abs() < 1e-9);
    }

    #[test]
    fn full_order_lifter_keeps_log_mel() {
        let s = RefScale {
            fft: 256,
            hop: 128,
            bands: 12,
            order: 12,
            ..RefScale::default()
        };
        let x: Vec<f64> = (0..512)
            .map(|i| ((i * 31 % 17) as f64 - 8.0) / 10.0)
            .collect();
        let y = liftered_feature(&x, 8000.0, &s, false);
        let spec = frame_spectrum(&x[..256]);
        for (k, &v) in y[0].iter().enumerate() {
            let e: f64 = (0..=128)
                .map(|b| mel_weight(k, b, 12, 256, 8000.0) * spec[b])
                .sum();
            assert!((v - (e + 1e-5).ln()).abs() < 1e-9);
        }
    }
}
