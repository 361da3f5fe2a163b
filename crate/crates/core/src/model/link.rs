use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{normal_cdf, normal_pdf, normal_quantile_clamped};
use crate::error::{Result, ZarError};

/// Guard keeping fitted probabilities and unit-interval means away from 0 and 1.
pub const UNIT_GUARD: f64 = 1e-12;
const POSITIVE_FLOOR: f64 = 1e-300;
const POSITIVE_CEIL: f64 = 1e300;
const MAX_EXP: f64 = 690.0;

/// Strictly monotone link `g` mapping a parameter to its linear predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logit,
    Log,
    Identity,
    Probit,
    CLogLog,
}

/// Range of the parameter a link is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRange {
    /// (0, 1): the zero probability, or a Beta mean.
    Unit,
    /// (0, ∞): Gamma/IG means and all dispersions.
    Positive,
}

impl Link {
    pub fn link(self, theta: f64) -> f64 {
        match self {
            Link::Logit => (theta / (1.0 - theta)).ln(),
            Link::Log => theta.ln(),
            Link::Identity => theta,
            Link::Probit => normal_quantile_clamped(theta),
            Link::CLogLog => (-(-theta).ln_1p()).ln(),
        }
    }

    pub fn inverse(self, eta: f64) -> f64 {
        match self {
            Link::Logit => {
                if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                }
            }
            Link::Log => eta.min(MAX_EXP).exp(),
            Link::Identity => eta,
            Link::Probit => normal_cdf(eta),
            Link::CLogLog => -(-eta.min(MAX_EXP).exp()).exp_m1(),
        }
    }

    /// dθ/dη at `eta`.
    pub fn derivative(self, eta: f64) -> f64 {
        match self {
            Link::Logit => {
                let e = (-eta.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Link::Log => eta.min(MAX_EXP).exp(),
            Link::Identity => 1.0,
            Link::Probit => normal_pdf(eta),
            Link::CLogLog => {
                let eta = eta.min(MAX_EXP);
                (eta - eta.exp()).exp()
            }
        }
    }

    /// Inverse link clamped into the open parameter range.
    pub fn guarded_inverse(self, eta: f64, range: ParamRange) -> f64 {
        let theta = self.inverse(eta);
        match range {
            ParamRange::Unit => theta.clamp(UNIT_GUARD, 1.0 - UNIT_GUARD),
            ParamRange::Positive => theta.clamp(POSITIVE_FLOOR, POSITIVE_CEIL),
        }
    }

    pub fn compatible_with(self, range: ParamRange) -> bool {
        match range {
            ParamRange::Unit => matches!(self, Link::Logit | Link::Probit | Link::CLogLog),
            ParamRange::Positive => matches!(self, Link::Log | Link::Identity),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Logit => "logit",
            Link::Log => "log",
            Link::Identity => "identity",
            Link::Probit => "probit",
            Link::CLogLog => "cloglog",
        })
    }
}

impl FromStr for Link {
    type Err = ZarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logit" => Ok(Link::Logit),
            "log" => Ok(Link::Log),
            "identity" => Ok(Link::Identity),
            "probit" => Ok(Link::Probit),
            "cloglog" => Ok(Link::CLogLog),
            other => Err(ZarError::InvalidSpec(format!("unknown link '{other}'"))),
        }
    }
}
