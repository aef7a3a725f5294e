//! NSynth-style sample naming: `<family>_<source>_<iii>-<ppp>-<vvv>.wav`.

use std::sync::OnceLock;

use regex::Regex;

use super::{SampleMeta, Source};
use crate::error::{Error, Result};

/// MIDI range of an 88-key keyboard (A0..C8).
pub const PITCH_RANGE: std::ops::RangeInclusive<u8> = 21..=108;

/// Velocity layers present in the NSynth corpus.
pub const VELOCITY_LAYERS: [u8; 5] = [25, 50, 75, 100, 127];

fn name_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        Regex::new(
            r"^(?<family>[a-z_]+)_(?<source>acoustic|electronic|synthetic)_(?<iii>\d{3})-(?<ppp>\d{3})-(?<vvv>\d{3})(?:\.wav)?$",
        )
        .expect("static pattern")
    })
}

/// Parses a sample name into its metadata.
///
/// Accepts the bare stem (`guitar_acoustic_010-024-100`) or the full file name
/// with a `.wav` extension. Pitch and velocity must be valid MIDI values; with
/// `validate_grid` they must also lie on the 88-key × 5-layer grid.
pub fn parse_nsynth_name(name: &str, validate_grid: bool) -> Result<SampleMeta> {
    let caps = name_pattern()
        .captures(name)
        .ok_or_else(|| Error::MalformedName {
            name: name.to_owned(),
            reason: "expected <family>_<source>_<iii>-<ppp>-<vvv>".into(),
        })?;

    let number = |group: &str| -> u32 {
        // \d{3} always fits.
        caps[group].parse().expect("three decimal digits")
    };
    let source = match &caps["source"] {
        "acoustic" => Source::Acoustic,
        "electronic" => Source::Electronic,
        _ => Source::Synthetic,
    };
    let pitch = number("ppp");
    let velocity = number("vvv");
    for (field, value) in [("pitch", pitch), ("velocity", velocity)] {
        if value > 127 {
            return Err(Error::OutOfRange {
                name: name.to_owned(),
                field,
                value,
            });
        }
    }

    let meta = SampleMeta {
        family: caps["family"].to_owned(),
        source,
        instrument_id: number("iii"),
        pitch: pitch as u8,
        velocity: velocity as u8,
    };
    if validate_grid {
        check_grid(&meta, name)?;
    }
    Ok(meta)
}

/// Formats metadata as a file name. Inverse of [`parse_nsynth_name`].
pub fn format_nsynth_name(meta: &SampleMeta) -> String {
    format!(
        "{}_{}_{:03}-{:03}-{:03}.wav",
        meta.family,
        meta.source.as_str(),
        meta.instrument_id,
        meta.pitch,
        meta.velocity
    )
}

pub(crate) fn check_grid(meta: &SampleMeta, name: &str) -> Result<()> {
    if !PITCH_RANGE.contains(&meta.pitch) {
        return Err(Error::OutOfRange {
            name: name.to_owned(),
            field: "pitch",
            value: meta.pitch.into(),
        });
    }
    if !VELOCITY_LAYERS.contains(&meta.velocity) {
        return Err(Error::OutOfRange {
            name: name.to_owned(),
            field: "velocity",
            value: meta.velocity.into(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_figure_examples() {
        let low = parse_nsynth_name("guitar_acoustic_010-024-100", true).unwrap();
        assert_eq!(low.family, "guitar");
        assert_eq!(low.source, Source::Acoustic);
        assert_eq!(low.instrument_id, 10);
        assert_eq!(low.pitch, 24);
        assert_eq!(low.velocity, 100);

        let high = parse_nsynth_name("guitar_acoustic_010-049-100.wav", true).unwrap();
        assert_eq!(high.pitch, 49);
        assert_eq!(high.velocity, 100);
    }

    #[test]
    fn multi_token_family() {
        let meta = parse_nsynth_name("synth_lead_synthetic_000-060-127.wav", false).unwrap();
        assert_eq!(meta.family, "synth_lead");
        assert_eq!(meta.source, Source::Synthetic);
    }

    #[test]
    fn rejects_malformed() {
        for name in [
            "bass-synth-oops",
            "guitar_plucked_010-024-100",
            "guitar_acoustic_10-024-100",
            "Guitar_acoustic_010-024-100",
            "guitar_acoustic_010-024-100.flac",
        ] {
            let err = parse_nsynth_name(name, false).unwrap_err();
            assert_eq!(err.kind(), "MalformedName", "{name}");
        }
    }

    #[test]
    fn grid_validation() {
        assert!(parse_nsynth_name("bass_electronic_001-020-100", false).is_ok());
        let err = parse_nsynth_name("bass_electronic_001-020-100", true).unwrap_err();
        assert_eq!(err.kind(), "OutOfRange");
        let err = parse_nsynth_name("bass_electronic_001-060-064", true).unwrap_err();
        assert_eq!(err.kind(), "OutOfRange");
        let err = parse_nsynth_name("bass_electronic_001-200-100", false).unwrap_err();
        assert_eq!(err.kind(), "OutOfRange");
    }

    fn source() -> impl Strategy<Value = Source> {
        prop_oneof![
            Just(Source::Acoustic),
            Just(Source::Electronic),
            Just(Source::Synthetic)
        ]
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(
            family in "[a-z_]{1,16}",
            source in source(),
            instrument_id in 0u32..1000,
            pitch in 0u8..=127,
            velocity in 0u8..=127,
        ) {
            let meta = SampleMeta { family, source, instrument_id, pitch, velocity };
            let parsed = parse_nsynth_name(&format_nsynth_name(&meta), false).unwrap();
            prop_assert_eq!(parsed, meta);
        }
    }
}
