//! Fast paths against the straight-line reference implementations.

use instrument_eval::dsp::{FeatureExtractor, MelFilterbank, ScaleConfig};
use instrument_eval::instrument::{Instrument, Sample, SampleMeta, Source};
use instrument_eval::pitch::{Yin, YinConfig};
use instrument_eval::tc::{tc_measure, Normalization, TcConfig};
use instrument_eval_oracle as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(seed: u64, len: usize, peak: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-peak..peak)).collect()
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn filterbank_row_sums() {
    for (bands, fft, rate) in [(80, 2048, 44100), (40, 1024, 16000), (64, 4096, 48000)] {
        let fb = MelFilterbank::new(bands, fft, rate).unwrap();
        let m = fb.matrix();
        let expected = oracle::mel_row_sums(bands, fft, f64::from(rate));
        for (k, want) in expected.iter().enumerate() {
            let got: f64 = m.row(k).iter().sum();
            assert!((got - want).abs() < 1e-9, "band {k}: {got} vs {want}");
        }
    }
}

#[test]
fn filterbank_weights_match_per_bin() {
    let fb = MelFilterbank::new(80, 2048, 44100).unwrap();
    let m = fb.matrix();
    for k in (0..80).step_by(7) {
        for b in 0..=1024 {
            let want = oracle::mel_weight(k, b, 80, 2048, 44100.0);
            assert!((m[(k, b)] - want).abs() < 1e-12, "band {k} bin {b}");
        }
    }
}

#[test]
fn liftered_features_match() {
    let rate = 16000;
    let x: Vec<f64> = noise(5, 6000, 0.3)
        .iter()
        .enumerate()
        .map(|(i, n)| n + 0.4 * (2.0 * std::f64::consts::PI * 330.0 * i as f64 / 16000.0).sin())
        .collect();
    for (order, exclude_dc, power) in [(13, false, 1.0), (13, true, 1.0), (20, false, 2.0)] {
        let cfg = ScaleConfig {
            lifter_order: order,
            power,
            ..ScaleConfig::default()
        };
        let fast = FeatureExtractor::new(&cfg, rate, exclude_dc)
            .unwrap()
            .extract(&x)
            .unwrap()
            .y;
        let reference = oracle::liftered_feature(
            &x,
            f64::from(rate),
            &oracle::RefScale {
                order,
                power,
                ..oracle::RefScale::default()
            },
            exclude_dc,
        );
        assert_eq!(fast.cols(), reference.len());
        for (t, frame) in reference.iter().enumerate() {
            for (k, &want) in frame.iter().enumerate() {
                let got = fast[(k, t)];
                assert!(
                    (got - want).abs() <= 1e-6 * want.abs().max(1.0),
                    "order {order} band {k} frame {t}: {got} vs {want}"
                );
            }
        }
    }
}

fn instrument(waves: &[Vec<f64>], rate: u32) -> Instrument {
    let samples = waves
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let meta = SampleMeta {
                family: "oracle".into(),
                source: Source::Electronic,
                instrument_id: 1,
                pitch: 40 + i as u8,
                velocity: 100,
            };
            Sample::new(meta, x.clone(), rate).unwrap()
        })
        .collect();
    Instrument::new("oracle", samples).unwrap()
}

#[test]
fn tc_matches_reference_across_settings() {
    let rate = 16000;
    let waves: Vec<Vec<f64>> = (0..4)
        .map(|i| noise(20 + i, 5000, 0.1 + 0.2 * i as f64))
        .collect();
    let inst = instrument(&waves, rate);
    let small = ScaleConfig {
        fft_size: 1024,
        hop_size: 256,
        mel_bands: 40,
        lifter_order: 10,
        ..ScaleConfig::default()
    };
    let small_ref = oracle::RefScale {
        fft: 1024,
        hop: 256,
        bands: 40,
        order: 10,
        ..oracle::RefScale::default()
    };
    for (normalization, exclude_dc) in [
        (Normalization::Mean, false),
        (Normalization::None, false),
        (Normalization::Mean, true),
    ] {
        let cfg = TcConfig {
            scales: vec![ScaleConfig::default(), small],
            normalization,
            exclude_dc,
        };
        let fast = tc_measure(&inst, &cfg).unwrap().tc;
        let slow = oracle::tc_reference(
            &waves,
            f64::from(rate),
            &[oracle::RefScale::default(), small_ref],
            normalization == Normalization::Mean,
            exclude_dc,
        );
        assert!(
            relative(fast, slow) < 1e-9,
            "{normalization:?} {exclude_dc}: {fast} vs {slow}"
        );
    }
}

#[test]
fn yin_difference_matches_direct_sum() {
    let cfg = YinConfig::default();
    let yin = Yin::new(&cfg, 44100).unwrap();
    let frame: Vec<f64> = noise(9, cfg.frame_size, 0.7);
    let fast = yin.difference(&frame);
    let slow = oracle::yin_difference(&frame);
    let scale = slow.iter().cloned().fold(0.0, f64::max);
    for (tau, (a, b)) in fast.iter().zip(&slow).enumerate() {
        assert!((a - b).abs() <= 1e-9 * scale, "tau {tau}: {a} vs {b}");
    }
}
