use serde::{Deserialize, Serialize};

use super::link::{Link, ParamRange};
use crate::distributions::ContinuousFamily;
use crate::error::{Result, ZarError};

/// Label used for the intercept column.
pub const INTERCEPT: &str = "(Intercept)";

/// Covariates and link of one of the three linear predictors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmodelSpec {
    pub covariates: Vec<String>,
    #[serde(default = "default_true")]
    pub intercept: bool,
    pub link: Link,
}

fn default_true() -> bool {
    true
}

impl SubmodelSpec {
    pub fn new<S: Into<String>>(covariates: impl IntoIterator<Item = S>, link: Link) -> Self {
        Self {
            covariates: covariates.into_iter().map(Into::into).collect(),
            intercept: true,
            link,
        }
    }

    pub fn intercept_only(link: Link) -> Self {
        Self { covariates: Vec::new(), intercept: true, link }
    }

    pub fn without_intercept(mut self) -> Self {
        self.intercept = false;
        self
    }

    /// Number of coefficients.
    pub fn len(&self) -> usize {
        self.covariates.len() + usize::from(self.intercept)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coefficient labels in design-matrix order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len());
        if self.intercept {
            out.push(INTERCEPT.to_string());
        }
        out.extend(self.covariates.iter().cloned());
        out
    }
}

/// Which linear predictor a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Submodel {
    Mu,
    Phi,
    Alpha,
}

impl Submodel {
    pub const ALL: [Submodel; 3] = [Submodel::Mu, Submodel::Phi, Submodel::Alpha];

    pub fn name(self) -> &'static str {
        match self {
            Submodel::Mu => "mu",
            Submodel::Phi => "phi",
            Submodel::Alpha => "alpha",
        }
    }
}

/// A zero-adjusted regression model: a continuous family plus linked linear
/// predictors for `μ`, `φ` and `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZarModelSpec {
    pub family: ContinuousFamily,
    pub mu: SubmodelSpec,
    pub phi: SubmodelSpec,
    pub alpha: SubmodelSpec,
}

impl ZarModelSpec {
    pub fn new(
        family: ContinuousFamily,
        mu: SubmodelSpec,
        phi: SubmodelSpec,
        alpha: SubmodelSpec,
    ) -> Result<Self> {
        let spec = Self { family, mu, phi, alpha };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that each submodel has at least one coefficient and a link
    /// compatible with its parameter's range.
    pub fn validate(&self) -> Result<()> {
        for which in Submodel::ALL {
            let sub = self.submodel(which);
            if sub.is_empty() {
                return Err(ZarError::InvalidSpec(format!(
                    "the {} submodel has no coefficients",
                    which.name()
                )));
            }
            let range = self.range(which);
            if !sub.link.compatible_with(range) {
                return Err(ZarError::InvalidSpec(format!(
                    "link '{}' cannot be used for {} of the {} family",
                    sub.link,
                    which.name(),
                    self.family
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for c in &sub.covariates {
                if !seen.insert(c) {
                    return Err(ZarError::InvalidSpec(format!(
                        "covariate '{c}' appears twice in the {} submodel",
                        which.name()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn submodel(&self, which: Submodel) -> &SubmodelSpec {
        match which {
            Submodel::Mu => &self.mu,
            Submodel::Phi => &self.phi,
            Submodel::Alpha => &self.alpha,
        }
    }

    pub fn range(&self, which: Submodel) -> ParamRange {
        match which {
            Submodel::Mu if self.family.unit_mean() => ParamRange::Unit,
            Submodel::Alpha => ParamRange::Unit,
            _ => ParamRange::Positive,
        }
    }

    /// Total number of coefficients `p₁ + p₂ + p₃`.
    pub fn n_coefficients(&self) -> usize {
        self.mu.len() + self.phi.len() + self.alpha.len()
    }
}
