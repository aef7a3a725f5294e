use std::path::PathBuf;

use thiserror::Error;

use crate::instrument::SampleKey;

/// Errors produced while loading, analysing or synthesizing instruments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed sample name {name:?}: {reason}")]
    MalformedName { name: String, reason: String },

    #[error("{field} {value} out of range for {name:?}")]
    OutOfRange {
        name: String,
        field: &'static str,
        value: u32,
    },

    #[error("unsupported audio format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{path} has {channels} channels and downmixing is disabled")]
    ChannelError { path: PathBuf, channels: u16 },

    #[error("corrupt audio file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("instrument needs at least {required} samples, found {found}")]
    EmptyInstrument { required: usize, found: usize },

    #[error("sample rate mismatch: {key} is {found} Hz, instrument is {expected} Hz")]
    RateMismatch {
        key: SampleKey,
        expected: u32,
        found: u32,
    },

    #[error("duplicate sample key {key}")]
    DuplicateKey { key: SampleKey },

    #[error("invalid sample {key}: {reason}")]
    InvalidSample { key: SampleKey, reason: String },

    #[error("signal{} has {len} samples, need at least {needed}", key.map(|k| format!(" {k}")).unwrap_or_default())]
    TooShort {
        key: Option<SampleKey>,
        len: usize,
        needed: usize,
    },

    #[error("mel filters {lower} and {upper} collapse onto DFT bin {bin}")]
    DegenerateBands {
        lower: usize,
        upper: usize,
        bin: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("no sample produced a voiced pitch estimate")]
    AllUnvoiced,

    #[error("harmonic {harmonic} of MIDI note {pitch} ({freq_hz:.1} Hz) exceeds Nyquist")]
    AliasedHarmonics {
        pitch: u8,
        harmonic: usize,
        freq_hz: f64,
    },
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedName { .. } => "MalformedName",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::UnsupportedFormat { .. } => "UnsupportedFormat",
            Error::ChannelError { .. } => "ChannelError",
            Error::CorruptFile { .. } => "CorruptFile",
            Error::Io { .. } => "Io",
            Error::Manifest { .. } => "Manifest",
            Error::EmptyInstrument { .. } => "EmptyInstrument",
            Error::RateMismatch { .. } => "RateMismatch",
            Error::DuplicateKey { .. } => "DuplicateKey",
            Error::InvalidSample { .. } => "InvalidSample",
            Error::TooShort { .. } => "TooShort",
            Error::DegenerateBands { .. } => "DegenerateBands",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::NonPositiveFrequency(_) => "NonPositiveFrequency",
            Error::AllUnvoiced => "AllUnvoiced",
            Error::AliasedHarmonics { .. } => "AliasedHarmonics",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
