//! Cepstral lifter over the mel axis.
//!
//! The forward transform is the orthonormal DCT-II, so its inverse is the
//! transpose. Liftering keeps a contiguous run of low-quefrency coefficients
//! and zeroes the rest; the composite `Dᵀ · D_masked` is an orthogonal
//! projection onto the smooth part of the log-mel envelope.

use super::{Matrix, ScaleConfig};
use crate::error::{Error, Result};

/// Orthonormal DCT-II basis, `n × n`. Row k is the k-th cosine.
pub fn dct_ii(n: usize) -> Matrix {
    let nf = n as f64;
    Matrix::from_fn(n, n, |k, i| {
        let scale = if k == 0 {
            (1.0 / nf).sqrt()
        } else {
            (2.0 / nf).sqrt()
        };
        scale * (std::f64::consts::PI * k as f64 * (i as f64 + 0.5) / nf).cos()
    })
}

#[derive(Debug, Clone)]
pub struct LifterBasis {
    dct: Matrix,
    masked: Matrix,
    inverse: Matrix,
    projection: Matrix,
    kept: std::ops::Range<usize>,
}

impl LifterBasis {
    /// Keeps coefficients `0..order`, or `1..=order` when `exclude_dc` is set
    /// (clamped to the number of bands).
    pub fn new(bands: usize, order: usize, exclude_dc: bool) -> Result<Self> {
        if order == 0 || order > bands {
            return Err(Error::InvalidConfig(format!(
                "lifter order {order} must lie in 1..={bands}"
            )));
        }
        let kept = if exclude_dc {
            1..(order + 1).min(bands)
        } else {
            0..order
        };
        let dct = dct_ii(bands);
        let masked = Matrix::from_fn(bands, bands, |r, c| {
            if kept.contains(&r) {
                dct[(r, c)]
            } else {
                0.0
            }
        });
        let inverse = dct.transpose();
        let projection = inverse.matmul(&masked);
        Ok(LifterBasis {
            dct,
            masked,
            inverse,
            projection,
            kept,
        })
    }

    pub fn bands(&self) -> usize {
        self.dct.rows()
    }

    /// Indices of the retained cepstral coefficients.
    pub fn kept(&self) -> std::ops::Range<usize> {
        self.kept.clone()
    }

    pub fn dct(&self) -> &Matrix {
        &self.dct
    }

    pub fn masked(&self) -> &Matrix {
        &self.masked
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    /// `inverse · masked`.
    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    /// Lifters one log-mel column.
    pub fn apply(&self, input: &[f64], out: &mut [f64]) {
        let n = self.bands();
        debug_assert_eq!(input.len(), n);
        for (r, o) in out.iter_mut().enumerate().take(n) {
            *o = self
                .projection
                .row(r)
                .iter()
                .zip(input)
                .map(|(p, x)| p * x)
                .sum();
        }
    }
}

/// Builds the lifter of `cfg` with the DC coefficient retained.
pub fn build_lifter(cfg: &ScaleConfig) -> Result<LifterBasis> {
    LifterBasis::new(cfg.mel_bands, cfg.lifter_order, false)
}
