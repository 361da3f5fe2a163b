//! Residuals of the continuous part at a single positive observation.
//!
//! Deviance, Pearson and Anscombe residuals are divided by `√φ` so that they
//! are approximately standard normal, matching the quantile residual.

use crate::distributions::{normal_quantile_clamped, ContinuousFamily, MeanDispersionParams};

/// `Φ⁻¹(F_W(y))`, taken through the survival side above the median.
pub fn quantile(family: ContinuousFamily, p: &MeanDispersionParams, y: f64) -> f64 {
    let (cdf, sf) = family.tails_unchecked(p.mu, p.phi, y);
    if cdf < 0.5 {
        normal_quantile_clamped(cdf)
    } else {
        -normal_quantile_clamped(sf)
    }
}

/// Signed square root of the scaled unit deviance.
///
/// Gamma: `d = 2[−ln(y/μ) + (y − μ)/μ]`; inverse Gaussian:
/// `d = (y − μ)² / (μ² y)`. Returns `None` for the Beta family.
pub fn deviance(family: ContinuousFamily, p: &MeanDispersionParams, y: f64) -> Option<f64> {
    let mu = p.mu;
    let d = match family {
        ContinuousFamily::Beta01 => return None,
        ContinuousFamily::Gamma => {
            let r = (y - mu) / mu;
            // −ln(1 + r) + r, accurate near r = 0.
            2.0 * (r - r.ln_1p())
        }
        ContinuousFamily::InverseGaussian => (y - mu).powi(2) / (mu * mu * y),
    };
    Some(sign(y - mu) * (d.max(0.0) / p.phi).sqrt())
}

/// `(y − μ)/√(φ V(μ))` with `V(μ) = μ²` (Gamma) or `μ³` (inverse Gaussian).
pub fn pearson(family: ContinuousFamily, p: &MeanDispersionParams, y: f64) -> Option<f64> {
    match family {
        ContinuousFamily::Beta01 => None,
        _ => Some((y - p.mu) / family.variance(p).sqrt()),
    }
}

/// Variance-stabilized residual: `3(y^⅓ − μ^⅓)/μ^⅓` for Gamma and
/// `(ln y − ln μ)/√μ` for inverse Gaussian, each divided by `√φ`.
pub fn anscombe(family: ContinuousFamily, p: &MeanDispersionParams, y: f64) -> Option<f64> {
    let mu = p.mu;
    let a = match family {
        ContinuousFamily::Beta01 => return None,
        ContinuousFamily::Gamma => 3.0 * (y.cbrt() - mu.cbrt()) / mu.cbrt(),
        ContinuousFamily::InverseGaussian => (y / mu).ln() / mu.sqrt(),
    };
    Some(a / p.phi.sqrt())
}

/// `sign(y − μ)·√((1 − h) r_D² + h r_P²)`.
pub fn williams(
    family: ContinuousFamily,
    p: &MeanDispersionParams,
    y: f64,
    leverage: f64,
) -> Option<f64> {
    let rd = deviance(family, p, y)?;
    let rp = pearson(family, p, y)?;
    let h = leverage.clamp(0.0, 1.0);
    Some(sign(y - p.mu) * ((1.0 - h) * rd * rd + h * rp * rp).sqrt())
}

/// Signed deviance residual of the Bernoulli zero indicator.
pub fn binary(zero: bool, alpha: f64) -> f64 {
    let z = if zero { 1.0 } else { 0.0 };
    let ll = if zero { alpha.ln() } else { (-alpha).ln_1p() };
    sign(z - alpha) * (-2.0 * ll).max(0.0).sqrt()
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}
