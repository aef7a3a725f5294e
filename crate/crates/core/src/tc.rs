//! Intra-instrument timbral consistency.
//!
//! Every sample is mapped to one liftered log-mel matrix per scale. The
//! distance between two samples is the L1 distance of those matrices summed
//! over scales, and the instrument score aggregates the distance over all
//! unordered pairs. Lower is more consistent.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{l1_distance, FeatureExtractor, LifteredFeature, Matrix, ScaleConfig};
use crate::error::{Error, Result};
use crate::instrument::{Instrument, SampleKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Literal sums over elements and pairs.
    None,
    /// Mean over matrix elements per pair, then mean over pairs.
    #[default]
    Mean,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcConfig {
    pub scales: Vec<ScaleConfig>,
    pub normalization: Normalization,
    /// Drop cepstral coefficient 0 and keep `1..=lifter_order` instead.
    pub exclude_dc: bool,
}

impl Default for TcConfig {
    fn default() -> Self {
        TcConfig {
            scales: vec![ScaleConfig::default()],
            normalization: Normalization::Mean,
            exclude_dc: false,
        }
    }
}

impl TcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one scale is required".into(),
            ));
        }
        self.scales.iter().try_for_each(ScaleConfig::validate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcResult {
    pub tc: f64,
    /// Symmetric `K × K` distance matrix with zero diagonal.
    pub pair_matrix: Matrix,
    /// Row/column labels of `pair_matrix`, ascending.
    pub keys: Vec<SampleKey>,
    /// Per-scale contribution, aggregated like `tc`.
    pub per_scale: Vec<f64>,
    pub normalization: Normalization,
    pub exclude_dc: bool,
}

impl TcResult {
    pub fn k(&self) -> usize {
        self.keys.len()
    }

    pub fn scales(&self) -> usize {
        self.per_scale.len()
    }
}

/// Liftered features of every sample, indexed `[scale][sample]`.
pub fn instrument_features(inst: &Instrument, cfg: &TcConfig) -> Result<Vec<Vec<LifteredFeature>>> {
    cfg.validate()?;
    let len = inst.sample_len();
    cfg.scales
        .iter()
        .enumerate()
        .map(|(s, scale)| {
            if len < scale.fft_size {
                return Err(Error::TooShort {
                    key: inst.keys().next(),
                    len,
                    needed: scale.fft_size,
                });
            }
            let fe = FeatureExtractor::new(scale, inst.sample_rate(), cfg.exclude_dc)?
                .with_scale_index(s);
            inst.samples()
                .par_iter()
                .map(|sample| {
                    fe.extract(&sample.samples).map_err(|e| match e {
                        Error::TooShort { len, needed, .. } => Error::TooShort {
                            key: Some(sample.key()),
                            len,
                            needed,
                        },
                        other => other,
                    })
                })
                .collect()
        })
        .collect()
}

/// Computes the timbral-consistency score of an instrument.
///
/// Pair distances are evaluated in parallel, stored, and then reduced
/// serially in lexicographic `(i, j)` order, so the result is bitwise
/// reproducible for any thread count.
pub fn tc_measure(inst: &Instrument, cfg: &TcConfig) -> Result<TcResult> {
    let k = inst.len();
    if k < 2 {
        return Err(Error::EmptyInstrument {
            required: 2,
            found: k,
        });
    }
    let features = instrument_features(inst, cfg)?;

    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let distances: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            features
                .iter()
                .map(|per_sample| {
                    let (a, b) = (&per_sample[i].y, &per_sample[j].y);
                    let l1 = l1_distance(a.as_slice(), b.as_slice());
                    match cfg.normalization {
                        Normalization::None => l1,
                        Normalization::Mean => l1 / a.as_slice().len() as f64,
                    }
                })
                .collect()
        })
        .collect();

    let n_scales = cfg.scales.len();
    let mut pair_matrix = Matrix::zeros(k, k);
    let mut per_scale = vec![0.0; n_scales];
    let mut total = 0.0;
    for (&(i, j), per) in pairs.iter().zip(&distances) {
        let d: f64 = per.iter().sum();
        pair_matrix[(i, j)] = d;
        pair_matrix[(j, i)] = d;
        total += d;
        for (acc, v) in per_scale.iter_mut().zip(per) {
            *acc += v;
        }
    }
    if cfg.normalization == Normalization::Mean {
        let n = pairs.len() as f64;
        total /= n;
        per_scale.iter_mut().for_each(|v| *v /= n);
    }

    Ok(TcResult {
        tc: total,
        pair_matrix,
        keys: inst.keys().collect(),
        per_scale,
        normalization: cfg.normalization,
        exclude_dc: cfg.exclude_dc,
    })
}

/// Renders the pair matrix as CSV with `p<pitch>_v<velocity>` labels.
pub fn tc_pair_matrix_export(res: &TcResult) -> String {
    let mut out = String::from("key");
    for key in &res.keys {
        write!(out, ",{key}").unwrap();
    }
    out.push('\n');
    for (i, key) in res.keys.iter().enumerate() {
        write!(out, "{key}").unwrap();
        for &v in res.pair_matrix.row(i) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}
