//! Sample and instrument data model, plus directory ingestion.
//!
//! An [`Instrument`] is an ensemble of equal-length mono samples at one
//! sample rate, indexed by `(pitch, velocity)` and stored in ascending key
//! order. Every metric in this crate iterates samples in that order.

mod nsynth;
mod wav;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nsynth::{format_nsynth_name, parse_nsynth_name, PITCH_RANGE, VELOCITY_LAYERS};
pub use wav::{load_wav, read_wav, write_wav, Waveform};

/// Name of the optional metadata sidecar inside an instrument directory.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Acoustic,
    Electronic,
    Synthetic,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Acoustic => "acoustic",
            Source::Electronic => "electronic",
            Source::Synthetic => "synthetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleMeta {
    pub family: String,
    pub source: Source,
    pub instrument_id: u32,
    /// MIDI note number.
    pub pitch: u8,
    /// MIDI velocity.
    pub velocity: u8,
}

impl SampleMeta {
    pub fn key(&self) -> SampleKey {
        SampleKey {
            pitch: self.pitch,
            velocity: self.velocity,
        }
    }
}

/// Position of a sample on the pitch × velocity grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SampleKey {
    pub pitch: u8,
    pub velocity: u8,
}

impl fmt::Display for SampleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}_v{}", self.pitch, self.velocity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub meta: SampleMeta,
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Sample {
    /// Validates that the waveform is non-empty, finite and within `[-1, 1]`.
    pub fn new(meta: SampleMeta, samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let key = meta.key();
        let invalid = |reason: String| Error::InvalidSample { key, reason };
        if sample_rate == 0 {
            return Err(invalid("sample rate is zero".into()));
        }
        if samples.is_empty() {
            return Err(invalid("waveform is empty".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(invalid(format!(
                "amplitude {} at index {i} is not a finite value in [-1, 1]",
                samples[i]
            )));
        }
        Ok(Sample {
            meta,
            samples,
            sample_rate,
        })
    }

    pub fn key(&self) -> SampleKey {
        self.meta.key()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// How samples of differing length are brought to a common length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthPolicy {
    /// Append zeros up to the longest sample.
    #[default]
    PadToMax,
    /// Cut every sample to the shortest one.
    TruncateToMin,
    /// Pad or cut every sample to exactly this many samples.
    Fixed(usize),
}

impl LengthPolicy {
    fn target(self, lengths: impl Iterator<Item = usize> + Clone) -> usize {
        match self {
            LengthPolicy::PadToMax => lengths.max().unwrap_or(0),
            LengthPolicy::TruncateToMin => lengths.min().unwrap_or(0),
            LengthPolicy::Fixed(n) => n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instrument {
    name: String,
    samples: Vec<Sample>,
    sample_rate: u32,
}

impl Instrument {
    /// Builds an instrument from samples that already share rate and length.
    ///
    /// Samples are sorted by key; at least one sample is required.
    pub fn new(name: impl Into<String>, mut samples: Vec<Sample>) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyInstrument {
            required: 1,
            found: 0,
        })?;
        let sample_rate = first.sample_rate;
        let len = first.len();

        samples.sort_by_key(Sample::key);
        for pair in samples.windows(2) {
            if pair[0].key() == pair[1].key() {
                return Err(Error::DuplicateKey { key: pair[1].key() });
            }
        }
        for s in &samples {
            if s.sample_rate != sample_rate {
                return Err(Error::RateMismatch {
                    key: s.key(),
                    expected: sample_rate,
                    found: s.sample_rate,
                });
            }
            if s.len() != len {
                return Err(Error::InvalidSample {
                    key: s.key(),
                    reason: format!("length {} differs from instrument length {len}", s.len()),
                });
            }
        }
        Ok(Instrument {
            name: name.into(),
            samples,
            sample_rate,
        })
    }

    /// Conforms sample lengths with `policy`, then builds the instrument.
    pub fn conformed(
        name: impl Into<String>,
        mut samples: Vec<Sample>,
        policy: LengthPolicy,
    ) -> Result<Self> {
        let target = policy.target(samples.iter().map(Sample::len));
        if target == 0 {
            return Err(Error::InvalidConfig("conformed length is zero".into()));
        }
        for s in &mut samples {
            s.samples.resize(target, 0.0);
        }
        Instrument::new(name, samples)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Samples in ascending `(pitch, velocity)` order.
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Number of samples, K.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Common waveform length, L.
    pub fn sample_len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn keys(&self) -> impl Iterator<Item = SampleKey> + '_ {
        self.samples.iter().map(Sample::key)
    }

    pub fn get(&self, key: SampleKey) -> Option<&Sample> {
        self.samples
            .binary_search_by_key(&key, Sample::key)
            .ok()
            .map(|i| &self.samples[i])
    }
}

/// One entry of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub family: String,
    pub source: Source,
    pub instrument_id: u32,
    pub pitch: u8,
    pub velocity: u8,
}

impl ManifestEntry {
    pub fn meta(&self) -> SampleMeta {
        SampleMeta {
            family: self.family.clone(),
            source: self.source,
            instrument_id: self.instrument_id,
            pitch: self.pitch,
            velocity: self.velocity,
        }
    }

    pub fn from_meta(file: impl Into<String>, meta: &SampleMeta) -> Self {
        ManifestEntry {
            file: file.into(),
            family: meta.family.clone(),
            source: meta.source,
            instrument_id: meta.instrument_id,
            pitch: meta.pitch,
            velocity: meta.velocity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub policy: LengthPolicy,
    pub downmix: bool,
    pub validate_grid: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            policy: LengthPolicy::PadToMax,
            downmix: true,
            validate_grid: false,
        }
    }
}

/// Loads every sample of an instrument directory with default options.
pub fn load_instrument(dir: impl AsRef<Path>, policy: LengthPolicy) -> Result<Instrument> {
    load_instrument_with(
        dir,
        &LoadOptions {
            policy,
            ..LoadOptions::default()
        },
    )
}

/// Loads an instrument directory.
///
/// Metadata comes from `manifest.json` when present, otherwise from the
/// NSynth-style name of every `*.wav` file in the directory. At least two
/// samples are required.
pub fn load_instrument_with(dir: impl AsRef<Path>, opts: &LoadOptions) -> Result<Instrument> {
    let dir = dir.as_ref();
    let listing = list_samples(dir, opts.validate_grid)?;
    if listing.len() < 2 {
        return Err(Error::EmptyInstrument {
            required: 2,
            found: listing.len(),
        });
    }

    let mut seen = BTreeSet::new();
    for (_, meta) in &listing {
        if !seen.insert(meta.key()) {
            return Err(Error::DuplicateKey { key: meta.key() });
        }
    }

    let samples = listing
        .into_par_iter()
        .map(|(path, meta)| {
            let wav = load_wav(&path, opts.downmix)?;
            Sample::new(meta, wav.samples, wav.sample_rate)
        })
        .collect::<Result<Vec<_>>>()?;

    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    Instrument::conformed(name, samples, opts.policy)
}

/// Resolves the (file, metadata) pairs of a directory in a stable order.
pub fn list_samples(dir: &Path, validate_grid: bool) -> Result<Vec<(PathBuf, SampleMeta)>> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.is_file() {
        let text =
            std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let entries: Vec<ManifestEntry> =
            serde_json::from_str(&text).map_err(|e| Error::Manifest {
                path: manifest_path.clone(),
                reason: e.to_string(),
            })?;
        return entries
            .into_iter()
            .map(|entry| {
                let meta = entry.meta();
                if validate_grid {
                    nsynth::check_grid(&meta, &entry.file)?;
                }
                Ok((dir.join(&entry.file), meta))
            })
            .collect();
    }

    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|ext| ext == "wav") {
            files.push(path);
        }
    }
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let meta = parse_nsynth_name(&name, validate_grid)?;
            Ok((path, meta))
        })
        .collect()
}
