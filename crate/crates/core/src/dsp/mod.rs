//! Spectral feature chain: STFT magnitude, mel projection, log, cepstral lifter.

mod config;
mod feature;
mod lifter;
mod matrix;
mod mel;
mod stft;

pub use config::{ScaleConfig, Window};
pub use feature::{liftered_logmel, FeatureExtractor, LifteredFeature};
pub use lifter::{build_lifter, dct_ii, LifterBasis};
pub use matrix::{l1_distance, Matrix};
pub use mel::{build_mel_filterbank, hz_to_mel, mel_to_hz, MelFilterbank};
pub use stft::{stft_magnitude, Stft};
