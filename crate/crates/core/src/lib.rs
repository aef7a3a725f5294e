//! Evaluation metrics for sample-based instruments.
//!
//! An instrument is a set of one-shot samples spanning a pitch × velocity
//! grid. This crate scores two properties of such a set:
//!
//! - **Timbral consistency** ([`tc::tc_measure`]): mean (or summed) L1
//!   distance between cepstrally liftered log-mel spectrograms over all
//!   sample pairs. Liftering keeps the spectral envelope and discards the
//!   harmonic fine structure, so samples of different pitch compare by timbre.
//! - **Pitch accuracy** ([`pitch::mad_report`]): the median YIN estimate of
//!   every sample against its MIDI note, aggregated as an absolute deviation
//!   in semitones.
//!
//! [`synth`] generates deterministic additive instruments with known
//! properties for testing both metrics.
//!
//! ```no_run
//! use instrument_eval::instrument::{load_instrument, LengthPolicy};
//! use instrument_eval::pitch::{mad_report, MadMode, YinConfig};
//! use instrument_eval::tc::{tc_measure, TcConfig};
//!
//! let inst = load_instrument("guitar_acoustic_010", LengthPolicy::PadToMax)?;
//! let tc = tc_measure(&inst, &TcConfig::default())?;
//! let pitch = mad_report(&inst, &YinConfig::default(), MadMode::MeanAbs)?;
//! println!("K={} tc={:.3} mad={:.3}", tc.k(), tc.tc, pitch.mad);
//! # Ok::<(), instrument_eval::Error>(())
//! ```

pub mod dsp;
pub mod error;
pub mod instrument;
pub mod pitch;
pub mod synth;
pub mod tc;

pub use error::{Error, Result};
