//! Residuals for zero-adjusted regression fits.
//!
//! Residuals of the continuous part ([`ComponentKind`]) are defined only at
//! positive responses. The randomized quantile residual and the binary
//! residual of the zero indicator are defined everywhere. The star transform
//! lifts any component residual onto the scale of the full mixture; applied
//! to the quantile component it gives the ZAQR.

pub mod component;
mod envelope;
mod leverage;
mod star;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::normal_quantile_clamped;
use crate::error::{Result, ZarError};
use crate::model::{Dataset, ZarFit};
use crate::rng::{open_uniform, substream};

pub use envelope::{halfnormal_envelope, halfnormal_scores, Band, Envelope, EnvelopeOptions, EnvelopeRow};
pub use leverage::leverage;
pub use star::star_residual;
pub(crate) use envelope::percentile_sorted;
pub(crate) use star::star_unchecked;

/// Residuals of the continuous part, defined at positive responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Quantile,
    Deviance,
    Pearson,
    Anscombe,
    Williams,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 5] = [
        ComponentKind::Quantile,
        ComponentKind::Deviance,
        ComponentKind::Pearson,
        ComponentKind::Anscombe,
        ComponentKind::Williams,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Quantile => "quantile",
            Self::Deviance => "deviance",
            Self::Pearson => "pearson",
            Self::Anscombe => "anscombe",
            Self::Williams => "williams",
        }
    }
}

/// Every residual this crate computes.
///
/// `Star` wraps a component kind, so a star of a residual that is already
/// defined at zeros cannot be built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ResidualKind {
    Component(ComponentKind),
    BinaryZeroPart,
    RandomizedQuantile,
    Star(ComponentKind),
}

impl ResidualKind {
    pub const ZAQR: ResidualKind = ResidualKind::Star(ComponentKind::Quantile);

    /// All kinds in a fixed display order.
    pub fn all() -> Vec<ResidualKind> {
        let mut v: Vec<ResidualKind> = ComponentKind::ALL.iter().map(|&c| Self::Component(c)).collect();
        v.push(Self::BinaryZeroPart);
        v.push(Self::RandomizedQuantile);
        v.extend(ComponentKind::ALL.iter().map(|&c| Self::Star(c)));
        v
    }

    /// Whether the residual has a value at zero responses.
    pub fn defined_at_zero(self) -> bool {
        matches!(self, Self::BinaryZeroPart | Self::RandomizedQuantile)
    }

    /// Whether the residual needs covariates (for leverage).
    pub fn needs_leverage(self) -> bool {
        matches!(self, Self::Component(ComponentKind::Williams) | Self::Star(ComponentKind::Williams))
    }
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Component(c) => f.write_str(c.name()),
            Self::BinaryZeroPart => f.write_str("binary"),
            Self::RandomizedQuantile => f.write_str("rq"),
            Self::Star(ComponentKind::Quantile) => f.write_str("zaqr"),
            Self::Star(c) => write!(f, "star-{}", c.name()),
        }
    }
}

impl FromStr for ResidualKind {
    type Err = ZarError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let component = |name: &str| ComponentKind::ALL.into_iter().find(|c| c.name() == name);
        let kind = match s.as_str() {
            "binary" | "binary-zero-part" => Some(Self::BinaryZeroPart),
            "rq" | "randomized-quantile" => Some(Self::RandomizedQuantile),
            "zaqr" => Some(Self::ZAQR),
            other => match other.strip_prefix("star-") {
                Some(inner) => component(inner).map(Self::Star),
                None => component(other).map(Self::Component),
            },
        };
        kind.ok_or_else(|| ZarError::InvalidSpec(format!("unknown residual kind '{s}'")))
    }
}

impl TryFrom<String> for ResidualKind {
    type Error = ZarError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ResidualKind> for String {
    fn from(k: ResidualKind) -> String {
        k.to_string()
    }
}

/// Residual values for one kind; `None` marks observations where the
/// residual is not defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    pub kind: ResidualKind,
    pub values: Vec<Option<f64>>,
    pub alpha_hat: Vec<f64>,
    /// Seed of the uniform draws (randomized quantile residual only).
    pub seed: Option<u64>,
}

impl ResidualVector {
    pub fn defined(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

/// Computes residuals of `kind` for `fit`.
///
/// `data` supplies the covariates for leverage and is only needed for
/// Williams residuals. `seed` drives the uniform draws of the randomized
/// quantile residual and is ignored otherwise.
pub fn compute(fit: &ZarFit, data: Option<&Dataset>, kind: ResidualKind, seed: u64) -> Result<ResidualVector> {
    let values = match kind {
        ResidualKind::RandomizedQuantile => return Ok(randomized_quantile(fit, seed)),
        ResidualKind::BinaryZeroPart => return Ok(binary_zero_part(fit)),
        ResidualKind::Component(c) => component_values(fit, data, c)?,
        ResidualKind::Star(c) => {
            let raw = component_values(fit, data, c)?;
            raw.iter()
                .zip(&fit.fitted)
                .map(|(r, p)| r.map(|r| star_unchecked(r, p.alpha)))
                .collect()
        }
    };
    Ok(ResidualVector { kind, values, alpha_hat: alpha_hat(fit), seed: None })
}

/// ZAQR: the star transform of the quantile component residual.
pub fn zaqr(fit: &ZarFit) -> ResidualVector {
    compute(fit, None, ResidualKind::ZAQR, 0).expect("quantile residuals exist for every family")
}

fn alpha_hat(fit: &ZarFit) -> Vec<f64> {
    fit.fitted.iter().map(|p| p.alpha).collect()
}

fn component_values(fit: &ZarFit, data: Option<&Dataset>, kind: ComponentKind) -> Result<Vec<Option<f64>>> {
    let family = fit.family();
    if kind != ComponentKind::Quantile && family == crate::ContinuousFamily::Beta01 {
        return Err(ZarError::UnsupportedResidual {
            kind: kind.name().to_string(),
            reason: "only the quantile component residual is available for the beta family".into(),
        });
    }
    let any_positive = fit.response.iter().any(|&y| y > 0.0);
    let lev = if kind == ComponentKind::Williams && any_positive {
        let data = data.ok_or_else(|| ZarError::UnsupportedResidual {
            kind: kind.name().to_string(),
            reason: "covariates are required to compute leverage".into(),
        })?;
        Some(leverage(fit, data)?)
    } else {
        None
    };
    Ok(fit
        .response
        .iter()
        .zip(&fit.fitted)
        .enumerate()
        .map(|(i, (&y, p))| {
            if y <= 0.0 {
                return None;
            }
            let c = p.continuous();
            match kind {
                ComponentKind::Quantile => Some(component::quantile(family, &c, y)),
                ComponentKind::Deviance => component::deviance(family, &c, y),
                ComponentKind::Pearson => component::pearson(family, &c, y),
                ComponentKind::Anscombe => component::anscombe(family, &c, y),
                ComponentKind::Williams => {
                    component::williams(family, &c, y, lev.as_ref().and_then(|h| h[i]).unwrap_or(0.0))
                }
            }
        })
        .collect())
}

/// Randomized quantile residual of the full mixture.
///
/// A zero gets `Φ⁻¹(u)` with `u ~ U(0, α̂)`, drawn in row order from
/// sub-stream 0 of `seed`. A positive gets `Φ⁻¹(α̂ + (1 − α̂)F_W(y))`.
pub fn randomized_quantile(fit: &ZarFit, seed: u64) -> ResidualVector {
    let family = fit.family();
    let mut rng = substream(seed, 0);
    let values = fit
        .response
        .iter()
        .zip(&fit.fitted)
        .map(|(&y, p)| {
            let a = p.alpha;
            if y <= 0.0 {
                return Some(normal_quantile_clamped(a * open_uniform(&mut rng)));
            }
            let (cdf, sf) = family.tails_unchecked(p.mu, p.phi, y);
            let lower = a + (1.0 - a) * cdf;
            Some(if lower < 0.5 {
                normal_quantile_clamped(lower)
            } else {
                -normal_quantile_clamped((1.0 - a) * sf)
            })
        })
        .collect();
    ResidualVector {
        kind: ResidualKind::RandomizedQuantile,
        values,
        alpha_hat: alpha_hat(fit),
        seed: Some(seed),
    }
}

/// Signed Bernoulli deviance residual of `1(y = 0)` against `α̂`.
pub fn binary_zero_part(fit: &ZarFit) -> ResidualVector {
    let values = fit
        .response
        .iter()
        .zip(&fit.fitted)
        .map(|(&y, p)| Some(component::binary(y == 0.0, p.alpha)))
        .collect();
    ResidualVector { kind: ResidualKind::BinaryZeroPart, values, alpha_hat: alpha_hat(fit), seed: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{normal_quantile, ContinuousFamily, ZeroAdjustedParams};
    use crate::model::{Coefficients, Convergence, Link, SubmodelSpec, ZarModelSpec};

    fn fixed_fit(family: ContinuousFamily, y: Vec<f64>, params: Vec<ZeroAdjustedParams>) -> ZarFit {
        let mu_link = if family == ContinuousFamily::Beta01 { Link::Logit } else { Link::Log };
        ZarFit {
            spec: ZarModelSpec::new(
                family,
                SubmodelSpec::intercept_only(mu_link),
                SubmodelSpec::intercept_only(Link::Log),
                SubmodelSpec::intercept_only(Link::Logit),
            )
            .unwrap(),
            coefficients: Coefficients { mu: vec![0.0], phi: vec![0.0], alpha: vec![0.0] },
            vcov: None,
            fitted: params,
            ids: (1..=y.len()).map(|i| i.to_string()).collect(),
            response: y,
            loglik: 0.0,
            start_loglik: 0.0,
            convergence: Convergence { converged: true, iterations: 0, gradient_norm: 0.0 },
            degenerate: None,
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ResidualKind::all() {
            assert_eq!(k.to_string().parse::<ResidualKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(serde_json::from_str::<ResidualKind>(&json).unwrap(), k);
        }
        assert_eq!("ZAQR".parse::<ResidualKind>().unwrap(), ResidualKind::ZAQR);
        assert!("star-rq".parse::<ResidualKind>().is_err());
        assert!("star-binary".parse::<ResidualKind>().is_err());
    }

    #[test]
    fn undefined_exactly_at_zeros() {
        let p = ZeroAdjustedParams { alpha: 0.3, mu: 2.0, phi: 0.5 };
        let fit = fixed_fit(ContinuousFamily::Gamma, vec![0.0, 1.5, 0.0, 3.0], vec![p; 4]);
        for kind in ResidualKind::all() {
            if kind.needs_leverage() {
                continue;
            }
            let r = compute(&fit, None, kind, 11).unwrap();
            for (i, v) in r.values.iter().enumerate() {
                assert_eq!(v.is_some(), kind.defined_at_zero() || fit.response[i] > 0.0, "{kind} row {i}");
            }
        }
    }

    #[test]
    fn randomized_quantile_bounds_and_determinism() {
        let p = ZeroAdjustedParams { alpha: 0.25, mu: 0.4, phi: 20.0 };
        let y = vec![0.0, 0.01, 0.4, 0.0, 0.9];
        let fit = fixed_fit(ContinuousFamily::Beta01, y.clone(), vec![p; 5]);
        let a = randomized_quantile(&fit, 5);
        let b = randomized_quantile(&fit, 5);
        assert_eq!(a, b);
        let floor = normal_quantile(0.25).unwrap();
        for (v, &y) in a.values.iter().zip(&y) {
            let v = v.unwrap();
            if y > 0.0 {
                assert!(v >= floor);
            } else {
                assert!(v < floor);
            }
        }
    }

    #[test]
    fn tiny_alpha_zero_is_far_in_the_tail() {
        let p = ZeroAdjustedParams { alpha: 1e-10, mu: 1.0, phi: 1.0 };
        let fit = fixed_fit(ContinuousFamily::Gamma, vec![0.0], vec![p]);
        assert!(randomized_quantile(&fit, 1).values[0].unwrap() < -6.3);
    }

    #[test]
    fn zaqr_equals_randomized_quantile_when_component_is_positive() {
        let p = ZeroAdjustedParams { alpha: 0.3, mu: 2.0, phi: 0.4 };
        let y: Vec<f64> = (1..60).map(|i| 0.1 * i as f64).collect();
        let fit = fixed_fit(ContinuousFamily::InverseGaussian, y, vec![p; 59]);
        let q = compute(&fit, None, ResidualKind::Component(ComponentKind::Quantile), 0).unwrap();
        let z = zaqr(&fit);
        let rq = randomized_quantile(&fit, 0);
        for i in 0..59 {
            if q.values[i].unwrap() > 0.0 {
                assert!((z.values[i].unwrap() - rq.values[i].unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn beta_rejects_non_quantile_components() {
        let p = ZeroAdjustedParams { alpha: 0.3, mu: 0.5, phi: 2.0 };
        let fit = fixed_fit(ContinuousFamily::Beta01, vec![0.2], vec![p]);
        assert!(matches!(
            compute(&fit, None, ResidualKind::Component(ComponentKind::Pearson), 0),
            Err(ZarError::UnsupportedResidual { .. })
        ));
        let q = compute(&fit, None, ResidualKind::Component(ComponentKind::Quantile), 0).unwrap();
        // Beta(1, 1) is uniform.
        assert!((q.values[0].unwrap() - normal_quantile(0.2).unwrap()).abs() < 1e-12);
    }
}
