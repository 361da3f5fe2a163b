//! Maximum likelihood fitting.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::frame::{check_rank, ModelFrame};
use super::likelihood::{Coefficients, ContinuousPart, ZeroPart, PENALTY_LOGLIK};
use super::link::{ParamRange, UNIT_GUARD};
use super::optim::{central_difference, minimize, BfgsOptions, BfgsOutcome};
use super::spec::{Submodel, ZarModelSpec};
use crate::distributions::{ContinuousFamily, ZeroAdjustedParams};
use crate::error::{Result, ZarError};

const PHI_START_MIN: f64 = 1e-6;
const PHI_START_MAX: f64 = 1e6;
const SCORING_STEPS: usize = 25;

/// Where the optimizer starts.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum StartStrategy {
    /// Bernoulli scoring for `α`, least squares for `μ`, moments for `φ`.
    #[default]
    Default,
    /// Explicit original-scale coefficients.
    Given(Coefficients),
}

/// How the optimizer obtains gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    #[default]
    Analytic,
    CentralDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative gradient tolerance; see [`BfgsOptions::grad_tol`].
    pub grad_tol: f64,
    pub start: StartStrategy,
    pub gradient: GradientMode,
    /// Maximize the zero block and the continuous block separately.
    pub blockwise: bool,
    pub compute_vcov: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-8,
            start: StartStrategy::Default,
            gradient: GradientMode::Analytic,
            blockwise: true,
            compute_vcov: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    /// Largest absolute gradient component at the returned point.
    pub gradient_norm: f64,
}

/// A block that could not be estimated because the data lack zeros or
/// positives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    /// No zeros: `α̂` is fixed at the guard value and `β₃` is not estimated.
    NoZeros,
    /// No positives: `α̂` is fixed at one minus the guard value and `μ`, `φ`
    /// are not estimated.
    NoPositives,
}

/// A fitted ZAR model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZarFit {
    pub spec: ZarModelSpec,
    pub coefficients: Coefficients,
    /// Covariance of all coefficients in `(β₁, β₂, β₃)` order. Rows and
    /// columns of a block that was not estimated are zero.
    pub vcov: Option<Vec<Vec<f64>>>,
    pub fitted: Vec<ZeroAdjustedParams>,
    pub response: Vec<f64>,
    pub ids: Vec<String>,
    pub loglik: f64,
    pub start_loglik: f64,
    pub convergence: Convergence,
    pub degenerate: Option<Degeneracy>,
}

impl ZarFit {
    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn family(&self) -> ContinuousFamily {
        self.spec.family
    }

    pub fn converged(&self) -> bool {
        self.convergence.converged
    }

    /// Whether `which` has an interior estimate with a covariance block.
    /// With degenerate data `α̂` sits on the boundary of its range and
    /// counts as not estimated.
    pub fn estimated(&self, which: Submodel) -> bool {
        match (self.degenerate, which) {
            (Some(_), Submodel::Alpha) => false,
            (Some(Degeneracy::NoPositives), Submodel::Mu | Submodel::Phi) => false,
            _ => true,
        }
    }

    /// `(submodel, label)` for every coefficient, in `vcov` order.
    pub fn labels(&self) -> Vec<(Submodel, String)> {
        Submodel::ALL
            .iter()
            .flat_map(|&w| self.spec.submodel(w).labels().into_iter().map(move |l| (w, l)))
            .collect()
    }

    pub fn vcov_matrix(&self) -> Option<DMatrix<f64>> {
        self.vcov.as_ref().map(|rows| {
            let p = rows.len();
            DMatrix::from_fn(p, p, |i, j| rows[i][j])
        })
    }

    /// Fitted parameters for new covariate rows.
    pub fn predict(&self, data: &Dataset) -> Result<Vec<ZeroAdjustedParams>> {
        predict(self, data)
    }
}

/// Fits `spec` to `data`.
pub fn fit(spec: &ZarModelSpec, data: &Dataset, opts: &FitOptions) -> Result<ZarFit> {
    Fitter::new(spec, data)?.fit_response(data.response(), opts)
}

/// Reusable design matrices for fitting many responses against the same
/// covariates, as in simulation studies.
#[derive(Debug, Clone)]
pub struct Fitter {
    frame: ModelFrame,
    ids: Vec<String>,
}

impl Fitter {
    pub fn new(spec: &ZarModelSpec, data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(ZarError::InvalidData("the dataset has no observations".into()));
        }
        Ok(Self { frame: ModelFrame::new(spec, data)?, ids: data.ids().to_vec() })
    }

    pub fn spec(&self) -> &ZarModelSpec {
        &self.frame.spec
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    /// Fitted parameters at original-scale coefficients for the stored rows.
    pub fn params_at(&self, coef: &Coefficients) -> Vec<ZeroAdjustedParams> {
        let f = &self.frame;
        fitted_params(
            f,
            &f.mu.rescale(&coef.mu),
            &f.phi.rescale(&coef.phi),
            &f.alpha.rescale(&coef.alpha),
            None,
        )
    }

    /// Fits the stored covariates against the response `y`.
    pub fn fit_response(&self, y: &[f64], opts: &FitOptions) -> Result<ZarFit> {
        let frame = &self.frame;
        let spec = &frame.spec;
        if y.len() != frame.n() {
            return Err(ZarError::Dimension(format!(
                "{} responses for {} observations",
                y.len(),
                frame.n()
            )));
        }
        validate_response(spec.family, y)?;
        if let StartStrategy::Given(c) = &opts.start {
            c.check_lengths(spec)?;
        }

        let positive: Vec<usize> = (0..y.len()).filter(|&i| y[i] > 0.0).collect();
        let n_zero = y.len() - positive.len();
        let degenerate = if n_zero == 0 {
            Some(Degeneracy::NoZeros)
        } else if positive.is_empty() {
            Some(Degeneracy::NoPositives)
        } else {
            None
        };
        if degenerate.is_some() {
            warn!("degenerate data: {degenerate:?}; one block is not estimated");
        }

        if degenerate.is_none() {
            check_rank(&frame.alpha.x, &frame.alpha.labels, Submodel::Alpha)?;
        }
        if !positive.is_empty() {
            check_rank(&frame.mu.rows(&positive), &frame.mu.labels, Submodel::Mu)?;
            check_rank(&frame.phi.rows(&positive), &frame.phi.labels, Submodel::Phi)?;
            if positive.len() >= 2 {
                let first = y[positive[0]];
                if positive.iter().all(|&i| y[i] == first) {
                    return Err(ZarError::ConstantResponse(first));
                }
            }
        }

        let zero = ZeroPart::new(frame, y);
        let cont = ContinuousPart::new(frame, y);
        let pm = cont.p_mu();
        let (mut start_alpha, start_cont) = self.start(y, &positive, &zero, &opts.start);
        let alpha_boundary = degenerate.map(|d| match d {
            Degeneracy::NoZeros => UNIT_GUARD,
            Degeneracy::NoPositives => 1.0 - UNIT_GUARD,
        });
        if let Some(a) = alpha_boundary {
            start_alpha.iter_mut().for_each(|b| *b = 0.0);
            if spec.alpha.intercept {
                start_alpha[0] = spec.alpha.link.link(a);
            }
        }
        let start_nll = zero.nll(&start_alpha) + cont.nll(&start_cont);

        let bfgs = BfgsOptions { max_iter: opts.max_iter, grad_tol: opts.grad_tol };
        let mode = opts.gradient;
        let fit_alpha = degenerate.is_none();
        let fit_cont = degenerate != Some(Degeneracy::NoPositives);

        let (beta_alpha, beta_cont, convergence) = if opts.blockwise || degenerate.is_some() {
            let mut outcomes: Vec<BfgsOutcome> = Vec::new();
            let ba = if fit_alpha {
                let out = run(|b, g| zero.nll_grad(b, g), |b| zero.nll(b), start_alpha, bfgs, mode);
                let x = out.x.clone();
                outcomes.push(out);
                x
            } else {
                start_alpha
            };
            let bc = if fit_cont {
                let out = run(|b, g| cont.nll_grad(b, g), |b| cont.nll(b), start_cont, bfgs, mode);
                let x = out.x.clone();
                outcomes.push(out);
                x
            } else {
                start_cont
            };
            let convergence = Convergence {
                converged: outcomes.iter().all(|o| o.converged),
                iterations: outcomes.iter().map(|o| o.iterations).sum(),
                gradient_norm: outcomes.iter().map(BfgsOutcome::grad_norm).fold(0.0, f64::max),
            };
            (ba, bc, convergence)
        } else {
            let pc = start_cont.len();
            let mut x0 = start_cont;
            x0.extend(start_alpha);
            let joint = |b: &[f64], g: &mut [f64]| {
                let (gc, ga) = g.split_at_mut(pc);
                cont.nll_grad(&b[..pc], gc) + zero.nll_grad(&b[pc..], ga)
            };
            let joint_f = |b: &[f64]| cont.nll(&b[..pc]) + zero.nll(&b[pc..]);
            let out = run(joint, joint_f, x0, bfgs, mode);
            let convergence = Convergence {
                converged: out.converged,
                iterations: out.iterations,
                gradient_norm: out.grad_norm(),
            };
            (out.x[pc..].to_vec(), out.x[..pc].to_vec(), convergence)
        };
        if !convergence.converged {
            warn!(
                "optimizer did not converge after {} iterations (gradient norm {:.3e})",
                convergence.iterations, convergence.gradient_norm
            );
        }

        let nll = zero.nll(&beta_alpha) + cont.nll(&beta_cont);
        let loglik = finite_or_penalty(-nll);
        let start_loglik = finite_or_penalty(-start_nll);

        let coefficients = Coefficients {
            mu: frame.mu.unscale(&beta_cont[..pm]),
            phi: frame.phi.unscale(&beta_cont[pm..]),
            alpha: frame.alpha.unscale(&beta_alpha),
        };

        let vcov = if opts.compute_vcov {
            let mut scale = frame.mu.scale.clone();
            scale.extend(&frame.phi.scale);
            let cont_cov = if fit_cont {
                block_covariance(|b, g| cont.nll_grad(b, g), &beta_cont, &scale)
            } else {
                DMatrix::zeros(beta_cont.len(), beta_cont.len())
            };
            let alpha_cov = if fit_alpha {
                block_covariance(|b, g| zero.nll_grad(b, g), &beta_alpha, &frame.alpha.scale)
            } else {
                DMatrix::zeros(beta_alpha.len(), beta_alpha.len())
            };
            let pc = beta_cont.len();
            let p = pc + beta_alpha.len();
            let mut rows = vec![vec![0.0; p]; p];
            for i in 0..p {
                for j in 0..p {
                    rows[i][j] = if i < pc && j < pc {
                        cont_cov[(i, j)]
                    } else if i >= pc && j >= pc {
                        alpha_cov[(i - pc, j - pc)]
                    } else {
                        0.0
                    };
                }
            }
            Some(rows)
        } else {
            None
        };

        let fitted = fitted_params(frame, &beta_cont[..pm], &beta_cont[pm..], &beta_alpha, alpha_boundary);

        Ok(ZarFit {
            spec: spec.clone(),
            coefficients,
            vcov,
            fitted,
            response: y.to_vec(),
            ids: self.ids.clone(),
            loglik,
            start_loglik,
            convergence,
            degenerate,
        })
    }

    /// Scaled starting vectors `(β̃₃, [β̃₁, β̃₂])`.
    fn start(
        &self,
        y: &[f64],
        positive: &[usize],
        zero: &ZeroPart,
        strategy: &StartStrategy,
    ) -> (Vec<f64>, Vec<f64>) {
        let f = &self.frame;
        if let StartStrategy::Given(c) = strategy {
            let mut cont = f.mu.rescale(&c.mu);
            cont.extend(f.phi.rescale(&c.phi));
            return (f.alpha.rescale(&c.alpha), cont);
        }
        let spec = &f.spec;

        let n_zero = y.len() - positive.len();
        let mut alpha0 = vec![0.0; zero.p()];
        if spec.alpha.intercept && n_zero > 0 && !positive.is_empty() {
            alpha0[0] = spec.alpha.link.link(n_zero as f64 / y.len() as f64);
        }
        let alpha = if n_zero > 0 && !positive.is_empty() {
            let scored = zero.fisher_scoring(alpha0.clone(), SCORING_STEPS);
            if scored.iter().all(|b| b.is_finite()) {
                scored
            } else {
                alpha0
            }
        } else {
            alpha0
        };

        let mut mu = vec![0.0; f.mu.p()];
        let mut phi = vec![0.0; f.phi.p()];
        if !positive.is_empty() {
            let x = f.mu.rows(positive);
            let target = DVector::from_iterator(
                positive.len(),
                positive.iter().map(|&i| spec.mu.link.link(y[i])),
            );
            if let Ok(sol) = x.clone().svd(true, true).solve(&target, 1e-12) {
                if sol.iter().all(|v| v.is_finite()) {
                    mu = sol.iter().copied().collect();
                }
            }
            let mu_range = spec.range(Submodel::Mu);
            let eta = &x * DVector::from_column_slice(&mu);
            let mu_hat: Vec<f64> =
                eta.iter().map(|&e| spec.mu.link.guarded_inverse(e, mu_range)).collect();
            let ys: Vec<f64> = positive.iter().map(|&i| y[i]).collect();
            let phi0 = moment_dispersion(spec.family, &ys, &mu_hat);
            if spec.phi.intercept {
                phi[0] = spec.phi.link.link(phi0);
            }
        }
        mu.extend(phi);
        (alpha, mu)
    }
}

/// Method-of-moments dispersion given fitted means, kept in a sane range.
fn moment_dispersion(family: ContinuousFamily, y: &[f64], mu: &[f64]) -> f64 {
    let n = y.len() as f64;
    let raw = match family {
        ContinuousFamily::Beta01 => {
            let num: f64 = mu.iter().map(|m| m * (1.0 - m)).sum();
            let den: f64 = y.iter().zip(mu).map(|(y, m)| (y - m).powi(2)).sum();
            num / den - 1.0
        }
        ContinuousFamily::Gamma => y.iter().zip(mu).map(|(y, m)| ((y - m) / m).powi(2)).sum::<f64>() / n,
        ContinuousFamily::InverseGaussian => {
            y.iter().zip(mu).map(|(y, m)| (y - m).powi(2) / m.powi(3)).sum::<f64>() / n
        }
    };
    if raw.is_finite() {
        raw.clamp(PHI_START_MIN, PHI_START_MAX)
    } else {
        1.0
    }
}

fn run<G, F>(grad: G, value: F, x0: Vec<f64>, opts: BfgsOptions, mode: GradientMode) -> BfgsOutcome
where
    G: Fn(&[f64], &mut [f64]) -> f64,
    F: Fn(&[f64]) -> f64,
{
    match mode {
        GradientMode::Analytic => minimize(|b, g| grad(b, g), x0, opts),
        GradientMode::CentralDifference => minimize(
            |b, g| {
                central_difference(&value, b, g);
                value(b)
            },
            x0,
            opts,
        ),
    }
}

fn finite_or_penalty(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        PENALTY_LOGLIK
    }
}

/// Observed information of a block by central differences of its gradient,
/// inverted and mapped from scaled to original coefficients.
fn block_covariance<G>(grad: G, beta: &[f64], scale: &[f64]) -> DMatrix<f64>
where
    G: Fn(&[f64], &mut [f64]) -> f64,
{
    let p = beta.len();
    let mut h = DMatrix::<f64>::zeros(p, p);
    let mut probe = beta.to_vec();
    let mut up = vec![0.0; p];
    let mut down = vec![0.0; p];
    for k in 0..p {
        let step = 1e-5 * beta[k].abs().max(1.0);
        probe[k] = beta[k] + step;
        grad(&probe, &mut up);
        probe[k] = beta[k] - step;
        grad(&probe, &mut down);
        probe[k] = beta[k];
        for j in 0..p {
            h[(j, k)] = (up[j] - down[j]) / (2.0 * step);
        }
    }
    let h = (&h + h.transpose()) * 0.5;
    let inv = invert_information(h);
    DMatrix::from_fn(p, p, |i, j| inv[(i, j)] / (scale[i] * scale[j]))
}

/// Cholesky inverse, or an eigenvalue pseudo-inverse when the information
/// is not positive definite.
pub(crate) fn invert_information(h: DMatrix<f64>) -> DMatrix<f64> {
    if h.iter().all(|v| v.is_finite()) {
        if let Some(chol) = h.clone().cholesky() {
            return chol.inverse();
        }
    }
    warn!("observed information is not positive definite; using a pseudo-inverse");
    let p = h.nrows();
    let h = h.map(|v| if v.is_finite() { v } else { 0.0 });
    let eig = h.symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = max * p as f64 * f64::EPSILON;
    let mut inv = DMatrix::<f64>::zeros(p, p);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > tol {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / lambda;
        }
    }
    inv
}

fn fitted_params(
    frame: &ModelFrame,
    b_mu: &[f64],
    b_phi: &[f64],
    b_alpha: &[f64],
    alpha_override: Option<f64>,
) -> Vec<ZeroAdjustedParams> {
    let spec = &frame.spec;
    let mu_range = spec.range(Submodel::Mu);
    let eta_mu = frame.mu.eta(b_mu);
    let eta_phi = frame.phi.eta(b_phi);
    let eta_alpha = frame.alpha.eta(b_alpha);
    (0..frame.n())
        .map(|i| ZeroAdjustedParams {
            alpha: alpha_override
                .unwrap_or_else(|| spec.alpha.link.guarded_inverse(eta_alpha[i], ParamRange::Unit)),
            mu: spec.mu.link.guarded_inverse(eta_mu[i], mu_range),
            phi: spec.phi.link.guarded_inverse(eta_phi[i], ParamRange::Positive),
        })
        .collect()
}

/// Fitted `(α, μ, φ)` for each row of `data` at the coefficients of `fit`.
pub fn predict(fit: &ZarFit, data: &Dataset) -> Result<Vec<ZeroAdjustedParams>> {
    let spec = &fit.spec;
    let n = data.len();
    let eta = |which: Submodel, beta: &[f64]| -> Result<Vec<f64>> {
        let sub = spec.submodel(which);
        if beta.len() != sub.len() {
            return Err(ZarError::Dimension(format!(
                "{} coefficients for the {} submodel, expected {}",
                beta.len(),
                which.name(),
                sub.len()
            )));
        }
        let mut eta = vec![if sub.intercept { beta[0] } else { 0.0 }; n];
        let offset = usize::from(sub.intercept);
        for (k, name) in sub.covariates.iter().enumerate() {
            let col = data.column(name).ok_or_else(|| {
                ZarError::Dimension(format!("covariate '{name}' is missing from the new data"))
            })?;
            let b = beta[offset + k];
            eta.iter_mut().zip(col).for_each(|(e, x)| *e += b * x);
        }
        Ok(eta)
    };
    let c = &fit.coefficients;
    let eta_mu = eta(Submodel::Mu, &c.mu)?;
    let eta_phi = eta(Submodel::Phi, &c.phi)?;
    let eta_alpha = eta(Submodel::Alpha, &c.alpha)?;
    let mu_range = spec.range(Submodel::Mu);
    let boundary = fit.degenerate.map(|d| match d {
        Degeneracy::NoZeros => UNIT_GUARD,
        Degeneracy::NoPositives => 1.0 - UNIT_GUARD,
    });
    Ok((0..n)
        .map(|i| ZeroAdjustedParams {
            alpha: boundary
                .unwrap_or_else(|| spec.alpha.link.guarded_inverse(eta_alpha[i], ParamRange::Unit)),
            mu: spec.mu.link.guarded_inverse(eta_mu[i], mu_range),
            phi: spec.phi.link.guarded_inverse(eta_phi[i], ParamRange::Positive),
        })
        .collect())
}

/// Rejects negative or non-finite responses, and responses `>= 1` for the
/// Beta family.
pub(crate) fn validate_response(family: ContinuousFamily, y: &[f64]) -> Result<()> {
    let upper = family.support().upper;
    for (i, &v) in y.iter().enumerate() {
        if !v.is_finite() || v < 0.0 || (v > 0.0 && v >= upper) {
            return Err(ZarError::InvalidData(format!(
                "response {v} at row {} is outside [0, {upper}) for the {family} family",
                i + 1
            )));
        }
    }
    Ok(())
}
