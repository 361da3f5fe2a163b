use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::family::{ContinuousFamily, MeanDispersionParams};
use crate::error::{Result, ZarError};
use crate::rng::open_uniform;

/// Per-observation parameters `(α, μ, φ)` of a zero-adjusted distribution,
/// where `α = Pr(Y = 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroAdjustedParams {
    pub alpha: f64,
    pub mu: f64,
    pub phi: f64,
}

impl ZeroAdjustedParams {
    pub fn continuous(&self) -> MeanDispersionParams {
        MeanDispersionParams { mu: self.mu, phi: self.phi }
    }
}

/// Mixture of a point mass at zero and a continuous family on the positives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroAdjusted {
    family: ContinuousFamily,
    params: ZeroAdjustedParams,
}

impl ZeroAdjusted {
    pub fn new(family: ContinuousFamily, alpha: f64, mu: f64, phi: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ZarError::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        MeanDispersionParams::new(family, mu, phi)?;
        Ok(Self { family, params: ZeroAdjustedParams { alpha, mu, phi } })
    }

    pub fn from_params(family: ContinuousFamily, p: ZeroAdjustedParams) -> Result<Self> {
        Self::new(family, p.alpha, p.mu, p.phi)
    }

    pub fn family(&self) -> ContinuousFamily {
        self.family
    }

    pub fn params(&self) -> ZeroAdjustedParams {
        self.params
    }

    fn check(&self, y: f64) -> Result<()> {
        let upper = self.family.support().upper;
        if y >= 0.0 && y < upper {
            Ok(())
        } else {
            Err(ZarError::Domain(format!(
                "y = {y} is outside [0, {upper}) for the zero-adjusted {} model",
                self.family
            )))
        }
    }

    /// Probability mass `α` at zero, `(1 − α) f_W(y)` for `y > 0`.
    pub fn pdf(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        let p = &self.params;
        if y == 0.0 {
            Ok(p.alpha)
        } else {
            Ok((1.0 - p.alpha) * self.family.ln_pdf_unchecked(p.mu, p.phi, y).exp())
        }
    }

    /// `F(y) = α + (1 − α) F_W(y)`; exactly `α` at zero.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        let p = &self.params;
        if y == 0.0 {
            return Ok(p.alpha);
        }
        let (cdf, _) = self.family.tails_unchecked(p.mu, p.phi, y);
        Ok(p.alpha + (1.0 - p.alpha) * cdf)
    }

    /// `1 − F(y) = (1 − α)(1 − F_W(y))`.
    pub fn sf(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        let p = &self.params;
        if y == 0.0 {
            return Ok(1.0 - p.alpha);
        }
        let (_, sf) = self.family.tails_unchecked(p.mu, p.phi, y);
        Ok((1.0 - p.alpha) * sf)
    }

    /// One uniform against `α`, then a continuous draw.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_unchecked(self.family, &self.params, rng)
    }
}

pub(crate) fn sample_unchecked<R: RngCore + ?Sized>(
    family: ContinuousFamily,
    p: &ZeroAdjustedParams,
    rng: &mut R,
) -> f64 {
    if open_uniform(rng) < p.alpha {
        0.0
    } else {
        family.sample(&p.continuous(), rng)
    }
}
