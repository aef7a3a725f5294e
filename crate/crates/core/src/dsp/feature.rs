use super::{LifterBasis, Matrix, MelFilterbank, ScaleConfig, Stft};
use crate::error::{Error, Result};

/// Liftered log-mel matrix of one sample at one scale, `bands × frames`.
#[derive(Debug, Clone, PartialEq)]
pub struct LifteredFeature {
    pub y: Matrix,
    pub scale_index: usize,
}

impl LifteredFeature {
    pub fn bands(&self) -> usize {
        self.y.rows()
    }

    pub fn frames(&self) -> usize {
        self.y.cols()
    }
}

/// The per-scale feature chain: STFT magnitude, power, mel projection,
/// `ln(· + ε)`, lifter. Plans and matrices are built once and shared.
#[derive(Clone)]
pub struct FeatureExtractor {
    cfg: ScaleConfig,
    stft: Stft,
    filterbank: MelFilterbank,
    lifter: LifterBasis,
    scale_index: usize,
}

impl FeatureExtractor {
    pub fn new(cfg: &ScaleConfig, sample_rate: u32, exclude_dc: bool) -> Result<Self> {
        cfg.validate()?;
        let filterbank = MelFilterbank::new(cfg.mel_bands, cfg.fft_size, sample_rate)?;
        let lifter = LifterBasis::new(cfg.mel_bands, cfg.lifter_order, exclude_dc)?;
        Ok(Self::from_parts(cfg, filterbank, lifter))
    }

    pub fn from_parts(cfg: &ScaleConfig, filterbank: MelFilterbank, lifter: LifterBasis) -> Self {
        FeatureExtractor {
            cfg: *cfg,
            stft: Stft::new(cfg),
            filterbank,
            lifter,
            scale_index: 0,
        }
    }

    pub fn with_scale_index(mut self, index: usize) -> Self {
        self.scale_index = index;
        self
    }

    pub fn config(&self) -> &ScaleConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    pub fn lifter(&self) -> &LifterBasis {
        &self.lifter
    }

    /// `ln(B·|STFT(x)|^p + ε)` before liftering, `bands × frames`.
    pub fn log_mel(&self, x: &[f64]) -> Result<Matrix> {
        self.run(x, false)
    }

    pub fn extract(&self, x: &[f64]) -> Result<LifteredFeature> {
        Ok(LifteredFeature {
            y: self.run(x, true)?,
            scale_index: self.scale_index,
        })
    }

    fn run(&self, x: &[f64], lifter: bool) -> Result<Matrix> {
        let bands = self.filterbank.bands();
        let frames = self.stft.frame_count(x.len())?;
        let mut out = Matrix::zeros(bands, frames);
        let mut powered = vec![0.0; self.stft.bins()];
        let mut mel = vec![0.0; bands];
        let mut liftered = vec![0.0; bands];
        let (power, floor) = (self.cfg.power, self.cfg.log_floor);
        self.stft.for_each_frame(x, |t, mags| {
            if power == 1.0 {
                powered.copy_from_slice(mags);
            } else {
                for (d, &m) in powered.iter_mut().zip(mags) {
                    *d = m.powf(power);
                }
            }
            self.filterbank.apply(&powered, &mut mel);
            for m in mel.iter_mut() {
                *m = (*m + floor).ln();
            }
            let column = if lifter {
                self.lifter.apply(&mel, &mut liftered);
                &liftered
            } else {
                &mel
            };
            for (b, &v) in column.iter().enumerate() {
                out[(b, t)] = v;
            }
        })?;
        Ok(out)
    }
}

/// Liftered log-mel feature of `x` with explicitly supplied bases.
pub fn liftered_logmel(
    x: &[f64],
    cfg: &ScaleConfig,
    filterbank: &MelFilterbank,
    lifter: &LifterBasis,
) -> Result<LifteredFeature> {
    cfg.validate()?;
    if filterbank.bands() != lifter.bands() || filterbank.bins() != cfg.bins() {
        return Err(Error::InvalidConfig(
            "filterbank and lifter do not match the scale configuration".into(),
        ));
    }
    FeatureExtractor::from_parts(cfg, filterbank.clone(), lifter.clone()).extract(x)
}
