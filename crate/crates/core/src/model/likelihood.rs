//! Log-likelihood of a ZAR model.
//!
//! The density factorizes into a Bernoulli term for the zero indicator and a
//! continuous term for the positive responses:
//!
//! ```text
//! ℓ = Σ 1(yᵢ = 0) ln αᵢ + 1(yᵢ > 0) [ln(1 − αᵢ) + ln f_W(yᵢ; μᵢ, φᵢ)]
//!   = ℓ_zero(β₃) + ℓ_cont(β₁, β₂)
//! ```
//!
//! so the two blocks share no parameters and can be maximized separately.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::frame::ModelFrame;
use super::link::{Link, ParamRange};
use super::spec::ZarModelSpec;
use crate::distributions::ContinuousFamily;
use crate::error::{Result, ZarError};

/// Value returned for the log-likelihood when a linear predictor overflows
/// and the sum is not finite.
pub const PENALTY_LOGLIK: f64 = -1e300;

/// Original-scale coefficient vectors `β₁` (μ), `β₂` (φ), `β₃` (α).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub mu: Vec<f64>,
    pub phi: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Coefficients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.mu.clone();
        v.extend_from_slice(&self.phi);
        v.extend_from_slice(&self.alpha);
        v
    }

    pub fn check_lengths(&self, spec: &ZarModelSpec) -> Result<()> {
        let ok = self.mu.len() == spec.mu.len()
            && self.phi.len() == spec.phi.len()
            && self.alpha.len() == spec.alpha.len();
        if ok {
            Ok(())
        } else {
            Err(ZarError::Dimension(format!(
                "coefficient lengths ({}, {}, {}) do not match the spec ({}, {}, {})",
                self.mu.len(),
                self.phi.len(),
                self.alpha.len(),
                spec.mu.len(),
                spec.phi.len(),
                spec.alpha.len()
            )))
        }
    }
}

/// Full log-likelihood at original-scale coefficients.
///
/// A non-finite sum (overflowing linear predictors) is reported as
/// [`PENALTY_LOGLIK`] rather than an error.
pub fn log_likelihood(spec: &ZarModelSpec, data: &Dataset, coef: &Coefficients) -> Result<f64> {
    coef.check_lengths(spec)?;
    super::fit::validate_response(spec.family, data.response())?;
    let frame = ModelFrame::new(spec, data)?;
    let zero = ZeroPart::new(&frame, data.response());
    let cont = ContinuousPart::new(&frame, data.response());
    let b_alpha = frame.alpha.rescale(&coef.alpha);
    let mut b_cont = frame.mu.rescale(&coef.mu);
    b_cont.extend(frame.phi.rescale(&coef.phi));
    let total = -(zero.nll(&b_alpha) + cont.nll(&b_cont));
    Ok(if total.is_finite() { total } else { PENALTY_LOGLIK })
}

/// Negative Bernoulli log-likelihood of the zero indicator.
pub(crate) struct ZeroPart {
    x: DMatrix<f64>,
    zero: Vec<bool>,
    link: Link,
}

impl ZeroPart {
    pub fn new(frame: &ModelFrame, y: &[f64]) -> Self {
        Self {
            x: frame.alpha.x.clone(),
            zero: y.iter().map(|&v| v == 0.0).collect(),
            link: frame.spec.alpha.link,
        }
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn nll(&self, beta: &[f64]) -> f64 {
        let eta = &self.x * DVector::from_column_slice(beta);
        eta.iter()
            .zip(&self.zero)
            .map(|(&e, &z)| {
                let a = self.link.guarded_inverse(e, ParamRange::Unit);
                if z {
                    -a.ln()
                } else {
                    -(-a).ln_1p()
                }
            })
            .sum()
    }

    pub fn nll_grad(&self, beta: &[f64], grad: &mut [f64]) -> f64 {
        let eta = &self.x * DVector::from_column_slice(beta);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut f = 0.0;
        for (i, (&e, &z)) in eta.iter().zip(&self.zero).enumerate() {
            let a = self.link.guarded_inverse(e, ParamRange::Unit);
            let da = self.link.derivative(e);
            let (term, d_a) = if z { (-a.ln(), -1.0 / a) } else { (-(-a).ln_1p(), 1.0 / (1.0 - a)) };
            f += term;
            let w = d_a * da;
            for (j, g) in grad.iter_mut().enumerate() {
                *g += w * self.x[(i, j)];
            }
        }
        f
    }

    /// Fisher scoring for a binary GLM; used for starting values.
    pub fn fisher_scoring(&self, beta0: Vec<f64>, iterations: usize) -> Vec<f64> {
        let (n, p) = self.x.shape();
        let mut beta = beta0;
        for _ in 0..iterations {
            let eta = &self.x * DVector::from_column_slice(&beta);
            let mut xtwx = DMatrix::<f64>::zeros(p, p);
            let mut xtwz = DVector::<f64>::zeros(p);
            for i in 0..n {
                let a = self.link.guarded_inverse(eta[i], ParamRange::Unit);
                let d = self.link.derivative(eta[i]).max(1e-12);
                let w = d * d / (a * (1.0 - a));
                let z = if self.zero[i] { 1.0 } else { 0.0 };
                let work = eta[i] + (z - a) / d;
                let row = self.x.row(i);
                for j in 0..p {
                    xtwz[j] += w * row[j] * work;
                    for k in 0..p {
                        xtwx[(j, k)] += w * row[j] * row[k];
                    }
                }
            }
            let Some(chol) = xtwx.cholesky() else { break };
            let next = chol.solve(&xtwz);
            let change = next.iter().zip(&beta).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            beta = next.iter().copied().collect();
            if !beta.iter().all(|b| b.is_finite()) || change < 1e-10 {
                break;
            }
        }
        beta
    }
}

/// Negative continuous log-likelihood over the positive responses.
///
/// Parameter vector layout: scaled `β₁` followed by scaled `β₂`.
pub(crate) struct ContinuousPart {
    family: ContinuousFamily,
    x_mu: DMatrix<f64>,
    x_phi: DMatrix<f64>,
    y: Vec<f64>,
    mu_link: Link,
    phi_link: Link,
    mu_range: ParamRange,
}

impl ContinuousPart {
    pub fn new(frame: &ModelFrame, y: &[f64]) -> Self {
        let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] > 0.0).collect();
        Self {
            family: frame.spec.family,
            x_mu: frame.mu.rows(&rows),
            x_phi: frame.phi.rows(&rows),
            y: rows.iter().map(|&i| y[i]).collect(),
            mu_link: frame.spec.mu.link,
            phi_link: frame.spec.phi.link,
            mu_range: frame.spec.range(super::spec::Submodel::Mu),
        }
    }

    pub fn p_mu(&self) -> usize {
        self.x_mu.ncols()
    }

    pub fn p_phi(&self) -> usize {
        self.x_phi.ncols()
    }

    fn etas(&self, beta: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let pm = self.p_mu();
        let eta_mu = &self.x_mu * DVector::from_column_slice(&beta[..pm]);
        let eta_phi = &self.x_phi * DVector::from_column_slice(&beta[pm..]);
        (eta_mu, eta_phi)
    }

    pub fn nll(&self, beta: &[f64]) -> f64 {
        let (eta_mu, eta_phi) = self.etas(beta);
        let mut f = 0.0;
        for i in 0..self.y.len() {
            let mu = self.mu_link.guarded_inverse(eta_mu[i], self.mu_range);
            let phi = self.phi_link.guarded_inverse(eta_phi[i], ParamRange::Positive);
            f -= self.family.ln_pdf_unchecked(mu, phi, self.y[i]);
        }
        f
    }

    pub fn nll_grad(&self, beta: &[f64], grad: &mut [f64]) -> f64 {
        let pm = self.p_mu();
        let (eta_mu, eta_phi) = self.etas(beta);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut f = 0.0;
        for i in 0..self.y.len() {
            let mu = self.mu_link.guarded_inverse(eta_mu[i], self.mu_range);
            let phi = self.phi_link.guarded_inverse(eta_phi[i], ParamRange::Positive);
            let y = self.y[i];
            f -= self.family.ln_pdf_unchecked(mu, phi, y);
            let (s_mu, s_phi) = self.family.score_unchecked(mu, phi, y);
            let w_mu = -s_mu * self.mu_link.derivative(eta_mu[i]);
            let w_phi = -s_phi * self.phi_link.derivative(eta_phi[i]);
            for j in 0..pm {
                grad[j] += w_mu * self.x_mu[(i, j)];
            }
            for j in 0..self.p_phi() {
                grad[pm + j] += w_phi * self.x_phi[(i, j)];
            }
        }
        f
    }
}
