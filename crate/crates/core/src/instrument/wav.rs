//! RIFF/WAVE ingestion and export.

use std::io::{BufReader, Read};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// A mono waveform without metadata, amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

/// Reads a PCM16, PCM24 or float32 WAV file.
///
/// Integer samples are divided by `2^(bits-1)`. Multichannel audio is averaged
/// to mono when `downmix` is set and rejected otherwise.
pub fn load_wav(path: impl AsRef<Path>, downmix: bool) -> Result<Waveform> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_wav(BufReader::new(file), downmix, path)
}

/// Same as [`load_wav`] over any byte source; `origin` names it in errors.
pub fn read_wav<R: Read>(reader: R, downmix: bool, origin: &Path) -> Result<Waveform> {
    let reader = WavReader::new(reader).map_err(|e| classify(e, origin))?;
    let spec = reader.spec();
    let channels = spec.channels;
    if channels == 0 {
        return Err(corrupt(origin, "zero channels"));
    }
    if channels > 1 && !downmix {
        return Err(Error::ChannelError {
            path: origin.to_owned(),
            channels,
        });
    }

    let declared = reader.len() as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = 1.0 / f64::from(1u32 << (bits - 1));
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| classify_data(e, origin))?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| classify_data(e, origin))?,
        (format, bits) => {
            return Err(Error::UnsupportedFormat {
                path: origin.to_owned(),
                reason: format!("{bits}-bit {format:?} samples"),
            })
        }
    };
    if interleaved.len() != declared {
        return Err(corrupt(origin, "data chunk shorter than declared"));
    }
    let channels = usize::from(channels);
    if !interleaved.len().is_multiple_of(channels) {
        return Err(corrupt(origin, "partial frame at end of data"));
    }

    let samples = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    Ok(Waveform {
        samples,
        sample_rate: spec.sample_rate,
    })
}

/// Writes a mono 32-bit float WAV file.
pub fn write_wav(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: other.to_string(),
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(wrap)?;
    for &s in samples {
        writer.write_sample(s as f32).map_err(wrap)?;
    }
    writer.finalize().map_err(wrap)
}

fn corrupt(path: &Path, reason: &str) -> Error {
    Error::CorruptFile {
        path: path.to_owned(),
        reason: reason.to_owned(),
    }
}

/// A read failure inside the data chunk means the file ends early.
fn classify_data(err: hound::Error, path: &Path) -> Error {
    match err {
        hound::Error::IoError(io) => corrupt(path, &format!("data chunk truncated: {io}")),
        other => classify(other, path),
    }
}

fn classify(err: hound::Error, path: &Path) -> Error {
    match err {
        hound::Error::Unsupported => Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: "unsupported codec or layout".into(),
        },
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            corrupt(path, "unexpected end of file")
        }
        hound::Error::IoError(io) => Error::io(path, io),
        other => corrupt(path, &other.to_string()),
    }
}
