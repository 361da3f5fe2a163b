use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::distributions::{ContinuousFamily, ZeroAdjustedParams};
use crate::error::{Result, ZarError};
use crate::model::{Coefficients, Dataset, Fitter, Link, SubmodelSpec, ZarModelSpec, UNIT_GUARD};
use crate::rng::{open_uniform, substream};

/// Seed of the covariate draw used by the presets.
pub const PRESET_COVARIATE_SEED: u64 = 20_180_601;

/// How the covariates of a scenario are produced. They are generated once
/// and then held fixed across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum CovariateRule {
    /// Explicit columns, each of length `n`.
    Fixed { names: Vec<String>, columns: Vec<Vec<f64>> },
    /// Independent `U(lower, upper)` columns; column `j` comes from
    /// sub-stream `j` of `seed`.
    Uniform { names: Vec<String>, lower: f64, upper: f64, seed: u64 },
}

/// A data-generating model for calibration studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub n: usize,
    pub model: ZarModelSpec,
    pub truth: Coefficients,
    pub covariates: CovariateRule,
}

impl ScenarioSpec {
    /// Beta scenario with `μ ∈ (0.076, 0.378)`, `φ = e⁴` and
    /// `α ∈ (0.182, 0.5)` on two standard uniform covariates shared by the
    /// `μ` and `α` predictors.
    pub fn zabe_scenario1(n: usize) -> Self {
        Self::two_uniforms(
            "zabe-scenario-1",
            n,
            ContinuousFamily::Beta01,
            Link::Logit,
            Coefficients { mu: vec![-1.5, -1.0, 1.0], phi: vec![4.0], alpha: vec![-0.5, 0.5, -1.0] },
        )
    }

    /// Inverse Gaussian scenario with `μ ∈ (20.9, 403.4)`, `φ = 0.02` and
    /// `α ∈ (0.27, 0.62)` on two standard uniform covariates.
    pub fn zaig_scenario1(n: usize) -> Self {
        Self::two_uniforms(
            "zaig-scenario-1",
            n,
            ContinuousFamily::InverseGaussian,
            Link::Log,
            Coefficients {
                mu: vec![3.04, 1.48, 1.48],
                phi: vec![0.02f64.ln()],
                alpha: vec![-0.995, 0.742, 0.742],
            },
        )
    }

    /// Gamma counterpart of the inverse Gaussian scenario with `φ = 0.5`.
    pub fn zaga_scenario1(n: usize) -> Self {
        Self::two_uniforms(
            "zaga-scenario-1",
            n,
            ContinuousFamily::Gamma,
            Link::Log,
            Coefficients { mu: vec![0.5, 1.0, -0.5], phi: vec![0.5f64.ln()], alpha: vec![-0.995, 0.742, 0.742] },
        )
    }

    /// Looks up a preset by name.
    pub fn preset(name: &str, n: usize) -> Result<Self> {
        match name {
            "zabe-scenario-1" => Ok(Self::zabe_scenario1(n)),
            "zaga-scenario-1" => Ok(Self::zaga_scenario1(n)),
            "zaig-scenario-1" => Ok(Self::zaig_scenario1(n)),
            other => Err(ZarError::InvalidSpec(format!(
                "unknown scenario preset '{other}' (expected zabe-scenario-1, zaga-scenario-1 or zaig-scenario-1)"
            ))),
        }
    }

    fn two_uniforms(name: &str, n: usize, family: ContinuousFamily, mu_link: Link, truth: Coefficients) -> Self {
        Self {
            name: name.to_string(),
            n,
            model: ZarModelSpec {
                family,
                mu: SubmodelSpec::new(["x1", "x2"], mu_link),
                phi: SubmodelSpec::intercept_only(Link::Log),
                alpha: SubmodelSpec::new(["x1", "x2"], Link::Logit),
            },
            truth,
            covariates: CovariateRule::Uniform {
                names: vec!["x1".into(), "x2".into()],
                lower: 0.0,
                upper: 1.0,
                seed: PRESET_COVARIATE_SEED,
            },
        }
    }

    /// Covariate table with an all-zero placeholder response.
    pub fn dataset(&self) -> Result<Dataset> {
        let (names, columns) = match &self.covariates {
            CovariateRule::Fixed { names, columns } => (names.clone(), columns.clone()),
            CovariateRule::Uniform { names, lower, upper, seed } => {
                if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
                    return Err(ZarError::InvalidSpec(format!("invalid uniform range ({lower}, {upper})")));
                }
                let columns = (0..names.len())
                    .map(|j| {
                        let mut rng = substream(*seed, j as u64);
                        (0..self.n).map(|_| lower + (upper - lower) * open_uniform(&mut rng)).collect()
                    })
                    .collect();
                (names.clone(), columns)
            }
        };
        Dataset::new(vec![0.0; self.n], names, columns)
    }

    /// Checks the model and coefficients, and that every implied parameter
    /// lies strictly inside its range without touching a numerical guard.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(ZarError::InvalidSpec("scenario has n = 0".into()));
        }
        self.model.validate()?;
        self.truth.check_lengths(&self.model)?;
        let params = self.true_params()?;
        let unit = |v: f64| v > UNIT_GUARD && v < 1.0 - UNIT_GUARD;
        let positive = |v: f64| v.is_finite() && v > 1e-300 && v < 1e300;
        for (i, p) in params.iter().enumerate() {
            let mu_ok = if self.model.family.unit_mean() { unit(p.mu) } else { positive(p.mu) };
            if !(unit(p.alpha) && mu_ok && positive(p.phi)) {
                return Err(ZarError::InvalidSpec(format!(
                    "true parameters at row {} are out of range: alpha = {}, mu = {}, phi = {}",
                    i + 1,
                    p.alpha,
                    p.mu,
                    p.phi
                )));
            }
        }
        Ok(())
    }

    /// True `(α, μ, φ)` for every row.
    pub fn true_params(&self) -> Result<Vec<ZeroAdjustedParams>> {
        let data = self.dataset()?;
        Ok(Fitter::new(&self.model, &data)?.params_at(&self.truth))
    }

    /// SHA-256 of the scenario's JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
        values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    #[test]
    fn zabe_preset_matches_quoted_ranges() {
        let s = ScenarioSpec::zabe_scenario1(100);
        s.validate().unwrap();
        let p = s.true_params().unwrap();
        let (mlo, mhi) = range(p.iter().map(|p| p.mu));
        let (alo, ahi) = range(p.iter().map(|p| p.alpha));
        assert!(mlo > 0.0758 && mhi < 0.3776, "{mlo} {mhi}");
        assert!(alo > 0.1824 && ahi < 0.5, "{alo} {ahi}");
        assert!((p[0].phi - 4f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn zaig_preset_matches_quoted_ranges() {
        let s = ScenarioSpec::zaig_scenario1(100);
        s.validate().unwrap();
        // Range limits at covariates (0, 0) and (1, 1).
        let lo = 3.04f64.exp();
        let hi = (3.04f64 + 2.96).exp();
        assert!((lo - 20.9).abs() < 0.05 && (hi - 403.4).abs() < 0.05);
        let logistic = |e: f64| 1.0 / (1.0 + (-e).exp());
        assert!((logistic(-0.995) - 0.27).abs() < 0.005);
        assert!((logistic(-0.995 + 1.484) - 0.62).abs() < 0.005);
        let p = s.true_params().unwrap();
        assert!(p.iter().all(|p| p.mu > lo && p.mu < hi && (p.phi - 0.02).abs() < 1e-12));
    }

    #[test]
    fn covariates_are_reproducible_and_hash_changes() {
        let a = ScenarioSpec::zabe_scenario1(50);
        assert_eq!(a.dataset().unwrap(), a.dataset().unwrap());
        let mut b = a.clone();
        b.truth.phi[0] = 3.0;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn out_of_range_truth_is_rejected() {
        let mut s = ScenarioSpec::zabe_scenario1(10);
        s.truth.alpha[0] = 40.0;
        assert!(matches!(s.validate(), Err(ZarError::InvalidSpec(_))));
        assert!(ScenarioSpec::preset("nope", 10).is_err());
    }
}
