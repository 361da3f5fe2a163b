use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::normal::{normal_cdf, normal_ln_cdf, normal_quantile_clamped};
use super::special::{beta_inc, digamma, gamma_inc, ln_beta, ln_gamma, trigamma};
use crate::error::{Result, ZarError};
use crate::rng::open_uniform;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Continuous distribution for the positive part of a zero-adjusted response.
///
/// All three are parameterized by their mean `mu` and a dispersion or
/// precision `phi`:
///
/// | family            | support | variance          |
/// |-------------------|---------|-------------------|
/// | `Beta01`          | (0, 1)  | μ(1 − μ) / (1 + φ) |
/// | `Gamma`           | (0, ∞)  | φ μ²              |
/// | `InverseGaussian` | (0, ∞)  | φ μ³              |
///
/// For `Beta01` the shapes are `(μφ, (1 − μ)φ)`, so φ is a precision. For
/// `Gamma` the shape is `1/φ` and the scale `μφ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContinuousFamily {
    #[serde(rename = "beta")]
    Beta01,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "inverse-gaussian")]
    InverseGaussian,
}

/// Open interval `(lower, upper)` on which the continuous density lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn contains(&self, y: f64) -> bool {
        y > self.lower && y < self.upper
    }
}

/// Mean and dispersion of the continuous part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanDispersionParams {
    pub mu: f64,
    pub phi: f64,
}

impl MeanDispersionParams {
    pub fn new(family: ContinuousFamily, mu: f64, phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(ZarError::Domain(format!("phi must be positive and finite, got {phi}")));
        }
        let ok = match family {
            ContinuousFamily::Beta01 => mu > 0.0 && mu < 1.0,
            _ => mu > 0.0 && mu.is_finite(),
        };
        if !ok {
            return Err(ZarError::Domain(format!(
                "mu = {mu} is outside the mean range of the {family} family"
            )));
        }
        Ok(Self { mu, phi })
    }
}

impl ContinuousFamily {
    pub const ALL: [ContinuousFamily; 3] = [Self::Beta01, Self::Gamma, Self::InverseGaussian];

    pub fn support(self) -> Support {
        match self {
            Self::Beta01 => Support { lower: 0.0, upper: 1.0 },
            _ => Support { lower: 0.0, upper: f64::INFINITY },
        }
    }

    /// Whether the mean is restricted to (0, 1) rather than (0, ∞).
    pub fn unit_mean(self) -> bool {
        matches!(self, Self::Beta01)
    }

    pub fn mean(self, p: &MeanDispersionParams) -> f64 {
        p.mu
    }

    pub fn variance(self, p: &MeanDispersionParams) -> f64 {
        let (mu, phi) = (p.mu, p.phi);
        match self {
            Self::Beta01 => mu * (1.0 - mu) / (1.0 + phi),
            Self::Gamma => phi * mu * mu,
            Self::InverseGaussian => phi * mu * mu * mu,
        }
    }

    /// Density at `y`; errors when `y` lies outside the support.
    pub fn pdf(self, p: &MeanDispersionParams, y: f64) -> Result<f64> {
        self.check_interior(y)?;
        Ok(self.ln_pdf_unchecked(p.mu, p.phi, y).exp())
    }

    pub fn ln_pdf(self, p: &MeanDispersionParams, y: f64) -> Result<f64> {
        self.check_interior(y)?;
        Ok(self.ln_pdf_unchecked(p.mu, p.phi, y))
    }

    /// Distribution function at `y` (support closure).
    pub fn cdf(self, p: &MeanDispersionParams, y: f64) -> Result<f64> {
        self.check_closure(y)?;
        Ok(self.tails_unchecked(p.mu, p.phi, y).0)
    }

    /// Survival function `1 − F(y)`, computed directly in the upper tail.
    pub fn sf(self, p: &MeanDispersionParams, y: f64) -> Result<f64> {
        self.check_closure(y)?;
        Ok(self.tails_unchecked(p.mu, p.phi, y).1)
    }

    /// Inverse distribution function for `0 < q < 1`.
    pub fn quantile(self, p: &MeanDispersionParams, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(ZarError::Domain(format!("quantile requires 0 < q < 1, got {q}")));
        }
        Ok(self.quantile_unchecked(p.mu, p.phi, q))
    }

    /// Draws one value; Beta and Gamma by inversion (one uniform), inverse
    /// Gaussian by the Michael–Schucany–Haas transform (two uniforms).
    pub fn sample<R: RngCore + ?Sized>(self, p: &MeanDispersionParams, rng: &mut R) -> f64 {
        match self {
            Self::Beta01 | Self::Gamma => {
                let u = open_uniform(rng);
                self.quantile_unchecked(p.mu, p.phi, u)
            }
            Self::InverseGaussian => {
                let nu = normal_quantile_clamped(open_uniform(rng));
                let u = open_uniform(rng);
                let mu = p.mu;
                // t = μ w / (2λ) with λ = 1/φ
                let t = 0.5 * mu * nu * nu * p.phi;
                let x = mu / (1.0 + t + (t * t + 2.0 * t).sqrt());
                if u <= mu / (mu + x) {
                    x
                } else {
                    mu * mu / x
                }
            }
        }
    }

    fn check_interior(self, y: f64) -> Result<()> {
        if self.support().contains(y) {
            Ok(())
        } else {
            Err(ZarError::Domain(format!("y = {y} is outside the support of the {self} family")))
        }
    }

    fn check_closure(self, y: f64) -> Result<()> {
        let s = self.support();
        if y >= s.lower && y <= s.upper {
            Ok(())
        } else {
            Err(ZarError::Domain(format!("y = {y} is outside the support of the {self} family")))
        }
    }

    pub(crate) fn ln_pdf_unchecked(self, mu: f64, phi: f64, y: f64) -> f64 {
        match self {
            Self::Beta01 => {
                let a = mu * phi;
                let b = (1.0 - mu) * phi;
                (a - 1.0) * y.ln() + (b - 1.0) * (-y).ln_1p() - ln_beta(a, b)
            }
            Self::Gamma => {
                let shape = 1.0 / phi;
                let scale = mu * phi;
                (shape - 1.0) * y.ln() - y / scale - shape * scale.ln() - ln_gamma(shape)
            }
            Self::InverseGaussian => {
                let d = y - mu;
                -0.5 * (LN_2PI + phi.ln() + 3.0 * y.ln()) - d * d / (2.0 * phi * mu * mu * y)
            }
        }
    }

    /// Partial derivatives `(∂ℓ/∂μ, ∂ℓ/∂φ)` of the log density.
    pub(crate) fn score_unchecked(self, mu: f64, phi: f64, y: f64) -> (f64, f64) {
        match self {
            Self::Beta01 => {
                let a = mu * phi;
                let b = (1.0 - mu) * phi;
                let (da, db) = (digamma(a), digamma(b));
                let ly = y.ln();
                let l1y = (-y).ln_1p();
                let d_mu = phi * (db - da + ly - l1y);
                let d_phi = digamma(phi) - mu * da - (1.0 - mu) * db + mu * ly + (1.0 - mu) * l1y;
                (d_mu, d_phi)
            }
            Self::Gamma => {
                let shape = 1.0 / phi;
                let r = y / mu;
                let d_mu = (y - mu) / (phi * mu * mu);
                let d_shape = shape.ln() + 1.0 - digamma(shape) + r.ln() - r;
                (d_mu, -d_shape / (phi * phi))
            }
            Self::InverseGaussian => {
                let d = y - mu;
                let d_mu = d / (phi * mu * mu * mu);
                let d_phi = -0.5 / phi + d * d / (2.0 * phi * phi * mu * mu * y);
                (d_mu, d_phi)
            }
        }
    }

    /// Expected information for `μ` at fixed `φ`, `E[−∂²ℓ/∂μ²]`.
    pub fn mu_information(self, p: &MeanDispersionParams) -> f64 {
        let (mu, phi) = (p.mu, p.phi);
        match self {
            Self::Beta01 => phi * phi * (trigamma(mu * phi) + trigamma((1.0 - mu) * phi)),
            Self::Gamma => 1.0 / (phi * mu * mu),
            Self::InverseGaussian => 1.0 / (phi * mu * mu * mu),
        }
    }

    /// `(F(y), 1 − F(y))`.
    pub(crate) fn tails_unchecked(self, mu: f64, phi: f64, y: f64) -> (f64, f64) {
        if y <= 0.0 {
            return (0.0, 1.0);
        }
        match self {
            Self::Beta01 => beta_inc(mu * phi, (1.0 - mu) * phi, y),
            Self::Gamma => {
                if y.is_infinite() {
                    return (1.0, 0.0);
                }
                gamma_inc(1.0 / phi, y / (mu * phi))
            }
            Self::InverseGaussian => {
                if y.is_infinite() {
                    return (1.0, 0.0);
                }
                let lambda = 1.0 / phi;
                let root = (lambda / y).sqrt();
                let z1 = root * (y / mu - 1.0);
                let z2 = root * (y / mu + 1.0);
                let extra = (2.0 * lambda / mu + normal_ln_cdf(-z2)).exp();
                let cdf = (normal_cdf(z1) + extra).clamp(0.0, 1.0);
                let sf = (normal_cdf(-z1) - extra).clamp(0.0, 1.0);
                (cdf, sf)
            }
        }
    }

    // Safeguarded Newton on a transformed scale (logit for Beta, log
    // otherwise). The lower half is solved on the CDF and the upper half on
    // the survival function so both tails keep relative precision.
    pub(crate) fn quantile_unchecked(self, mu: f64, phi: f64, q: f64) -> f64 {
        let upper = q > 0.5;
        let target = if upper { 1.0 - q } else { q };
        let to_y = |t: f64| match self {
            Self::Beta01 => 1.0 / (1.0 + (-t).exp()),
            _ => t.exp(),
        };
        // g(t) is increasing in t with root at the quantile.
        let eval = |t: f64| -> (f64, f64) {
            let y = to_y(t);
            let (cdf, sf) = self.tails_unchecked(mu, phi, y);
            let g = if upper { target - sf } else { cdf - target };
            let dy = match self {
                Self::Beta01 => y * (1.0 - y),
                _ => y,
            };
            let dens = if y > 0.0 && self.support().contains(y) {
                self.ln_pdf_unchecked(mu, phi, y).exp()
            } else {
                0.0
            };
            (g, dens * dy)
        };

        let z = normal_quantile_clamped(q);
        let p = MeanDispersionParams { mu, phi };
        let sd = self.variance(&p).sqrt();
        let mut t = match self {
            Self::Beta01 => (mu / (1.0 - mu)).ln() + z * sd / (mu * (1.0 - mu)),
            _ => {
                let s2 = (1.0 + (sd / mu).powi(2)).ln();
                mu.ln() - 0.5 * s2 + z * s2.sqrt()
            }
        };
        if !t.is_finite() {
            t = 0.0;
        }

        let (mut g, mut dg) = eval(t);
        if g == 0.0 {
            return to_y(t);
        }
        // Bracket the root by geometric expansion.
        let (mut lo, mut hi);
        let mut step = 1.0;
        if g < 0.0 {
            lo = t;
            hi = t + step;
            loop {
                let (gh, _) = eval(hi);
                if gh >= 0.0 || step > 1e6 {
                    break;
                }
                lo = hi;
                step *= 2.0;
                hi += step;
            }
        } else {
            hi = t;
            lo = t - step;
            loop {
                let (gl, _) = eval(lo);
                if gl <= 0.0 || step > 1e6 {
                    break;
                }
                hi = lo;
                step *= 2.0;
                lo -= step;
            }
        }
        if !(t >= lo && t <= hi) {
            t = 0.5 * (lo + hi);
            (g, dg) = eval(t);
        }

        for _ in 0..200 {
            if g == 0.0 {
                break;
            }
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let newton = t - g / dg;
            let next = if dg > 0.0 && newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let delta = (next - t).abs();
            t = next;
            if delta <= 1e-15 * t.abs().max(1.0) || hi - lo <= 1e-15 * t.abs().max(1.0) {
                break;
            }
            (g, dg) = eval(t);
        }
        to_y(t)
    }
}

impl fmt::Display for ContinuousFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Beta01 => "beta",
            Self::Gamma => "gamma",
            Self::InverseGaussian => "inverse-gaussian",
        })
    }
}

impl FromStr for ContinuousFamily {
    type Err = ZarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "beta" | "beta01" | "zabe" => Ok(Self::Beta01),
            "gamma" | "zaga" => Ok(Self::Gamma),
            "inverse-gaussian" | "inverse_gaussian" | "ig" | "zaig" => Ok(Self::InverseGaussian),
            other => Err(ZarError::InvalidSpec(format!("unknown family '{other}'"))),
        }
    }
}
