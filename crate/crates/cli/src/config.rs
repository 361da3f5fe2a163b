//! TOML run configuration.
//!
//! ```toml
//! family = "beta"            # beta | gamma | inverse-gaussian
//! response = "essay"
//! id = "id"                  # optional id column
//!
//! [mu]
//! covariates = ["language", "mathematics"]
//! link = "logit"             # optional; logit for beta, log otherwise
//!
//! [phi]
//! link = "log"
//!
//! [alpha]
//! covariates = ["age_over_25"]
//! link = "logit"
//!
//! [fit]
//! max_iter = 500             # optimizer limits, both optional
//! grad_tol = 1e-8
//!
//! [residuals]
//! kinds = ["quantile", "rq", "zaqr"]
//!
//! [envelope]
//! kind = "zaqr"
//! replicates = 100
//! band = [2.5, 97.5]         # or "minmax"
//!
//! [scenario]
//! preset = "zabe-scenario-1" # or give truth and covariates explicitly
//! n = 100
//! reps = 1000
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use zar_core::model::Submodel;
use zar_core::residuals::Band;
use zar_core::simulation::{CovariateRule, TailSpec};
use zar_core::{Coefficients, ContinuousFamily, Dataset, FitOptions, Link, ResidualKind, ScenarioSpec, SubmodelSpec, ZarModelSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<String>,
    pub response: Option<String>,
    pub id: Option<String>,
    #[serde(default)]
    pub mu: SubmodelConfig,
    #[serde(default)]
    pub phi: SubmodelConfig,
    #[serde(default)]
    pub alpha: SubmodelConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub residuals: ResidualsConfig,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    pub scenario: Option<ScenarioConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmodelConfig {
    #[serde(default)]
    pub covariates: Vec<String>,
    pub link: Option<String>,
    #[serde(default = "yes")]
    pub intercept: bool,
}

impl Default for SubmodelConfig {
    fn default() -> Self {
        Self { covariates: Vec::new(), link: None, intercept: true }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub max_iter: Option<usize>,
    pub grad_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualsConfig {
    pub kinds: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub kind: Option<String>,
    pub replicates: Option<usize>,
    pub band: Option<BandConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BandConfig {
    Percentiles([f64; 2]),
    Named(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub kinds: Option<Vec<String>>,
    pub thresholds: Option<Vec<f64>>,
    pub workers: Option<usize>,
    pub truth: Option<Coefficients>,
    pub covariates: Option<CovariateRule>,
}

pub const DEFAULT_SCENARIO_N: usize = 100;

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(e.message().to_string()))
    }

    pub fn model_spec(&self) -> CliResult<ZarModelSpec> {
        let family = self
            .family
            .as_deref()
            .ok_or_else(|| CliError::Usage("config is missing 'family'".into()))?;
        let family = ContinuousFamily::from_str(family)?;
        let sub = |cfg: &SubmodelConfig, which: Submodel| -> CliResult<SubmodelSpec> {
            let link = match &cfg.link {
                Some(s) => Link::from_str(s)?,
                None => default_link(family, which),
            };
            let spec = SubmodelSpec::new(cfg.covariates.iter().cloned(), link);
            Ok(if cfg.intercept { spec } else { spec.without_intercept() })
        };
        Ok(ZarModelSpec::new(
            family,
            sub(&self.mu, Submodel::Mu)?,
            sub(&self.phi, Submodel::Phi)?,
            sub(&self.alpha, Submodel::Alpha)?,
        )?)
    }

    pub fn fit_options(&self) -> CliResult<FitOptions> {
        let d = FitOptions::default();
        let opts = FitOptions {
            max_iter: self.fit.max_iter.unwrap_or(d.max_iter),
            grad_tol: self.fit.grad_tol.unwrap_or(d.grad_tol),
            ..d
        };
        if opts.max_iter == 0 || !(opts.grad_tol > 0.0) {
            return Err(CliError::Usage("[fit] needs max_iter >= 1 and grad_tol > 0".into()));
        }
        Ok(opts)
    }

    pub fn response(&self) -> CliResult<&str> {
        self.response
            .as_deref()
            .ok_or_else(|| CliError::Usage("config is missing 'response'".into()))
    }

    /// Residual kinds from the command line, else the config, else `default`.
    pub fn kinds(&self, cli: Option<&[String]>, default: &[ResidualKind]) -> CliResult<Vec<ResidualKind>> {
        match cli.or(self.residuals.kinds.as_deref()) {
            Some(names) => parse_kinds(names),
            None => Ok(default.to_vec()),
        }
    }

    pub fn envelope_band(&self, cli: Option<&str>) -> CliResult<Band> {
        match (cli, &self.envelope.band) {
            (Some(s), _) => parse_band(s),
            (None, Some(BandConfig::Percentiles([lower, upper]))) => {
                Ok(Band::Percentile { lower: *lower, upper: *upper })
            }
            (None, Some(BandConfig::Named(s))) => parse_band(s),
            (None, None) => Ok(Band::Percentile { lower: 2.5, upper: 97.5 }),
        }
    }

    /// Builds the study scenario. `data`, when given, supplies fixed
    /// covariates for a scenario that does not generate its own.
    pub fn scenario(&self, data: Option<&Dataset>) -> CliResult<ScenarioSpec> {
        let sc = self
            .scenario
            .as_ref()
            .ok_or_else(|| CliError::Usage("config has no [scenario] section".into()))?;
        let scenario = if let Some(preset) = &sc.preset {
            if sc.truth.is_some() || sc.covariates.is_some() || self.family.is_some() {
                return Err(CliError::Usage(
                    "a preset scenario fixes the model; drop 'family', 'truth' and 'covariates'".into(),
                ));
            }
            ScenarioSpec::preset(preset, sc.n.unwrap_or(DEFAULT_SCENARIO_N))?
        } else {
            let model = self.model_spec()?;
            let truth = sc
                .truth
                .clone()
                .ok_or_else(|| CliError::Usage("scenario needs 'truth' coefficients or a 'preset'".into()))?;
            let (n, covariates) = match (&sc.covariates, data) {
                (Some(rule @ CovariateRule::Uniform { .. }), _) => (
                    sc.n.ok_or_else(|| CliError::Usage("scenario with uniform covariates needs 'n'".into()))?,
                    rule.clone(),
                ),
                (Some(rule @ CovariateRule::Fixed { columns, .. }), _) => {
                    let n = columns.first().map(Vec::len).or(sc.n).unwrap_or(DEFAULT_SCENARIO_N);
                    (n, rule.clone())
                }
                (None, Some(d)) => {
                    let names = model_covariates(&model);
                    let columns = names
                        .iter()
                        .map(|c| {
                            d.column(c)
                                .map(<[f64]>::to_vec)
                                .ok_or_else(|| CliError::Data(format!("covariate '{c}' is not in the data")))
                        })
                        .collect::<CliResult<Vec<_>>>()?;
                    (d.len(), CovariateRule::Fixed { names, columns })
                }
                (None, None) => {
                    if !model_covariates(&model).is_empty() {
                        return Err(CliError::Usage(
                            "scenario needs a 'covariates' rule or --data for its covariates".into(),
                        ));
                    }
                    let n = sc.n.unwrap_or(DEFAULT_SCENARIO_N);
                    (n, CovariateRule::Fixed { names: Vec::new(), columns: Vec::new() })
                }
            };
            ScenarioSpec {
                name: sc.name.clone().unwrap_or_else(|| "custom".into()),
                n,
                model,
                truth,
                covariates,
            }
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn tails(&self) -> CliResult<TailSpec> {
        match self.scenario.as_ref().and_then(|s| s.thresholds.clone()) {
            Some(t) => Ok(TailSpec::new(t)?),
            None => Ok(TailSpec::default()),
        }
    }
}

fn default_link(family: ContinuousFamily, which: Submodel) -> Link {
    match which {
        Submodel::Mu if family.unit_mean() => Link::Logit,
        Submodel::Mu | Submodel::Phi => Link::Log,
        Submodel::Alpha => Link::Logit,
    }
}

/// Distinct covariate names of all three submodels, in order of appearance.
pub fn model_covariates(spec: &ZarModelSpec) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for which in Submodel::ALL {
        for c in &spec.submodel(which).covariates {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
    }
    out
}

pub fn parse_kinds(names: &[String]) -> CliResult<Vec<ResidualKind>> {
    if names.is_empty() {
        return Err(CliError::Usage("empty residual kind list".into()));
    }
    names.iter().map(|s| Ok(ResidualKind::from_str(s.trim())?)).collect()
}

pub fn parse_band(s: &str) -> CliResult<Band> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("minmax") {
        return Ok(Band::MinMax);
    }
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || CliError::Usage(format!("band must be 'LOWER,UPPER' or 'minmax', got '{s}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lower: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let upper: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    Ok(Band::Percentile { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAM: &str = r#"
        family = "beta"
        response = "essay"
        [mu]
        covariates = ["language", "male"]
        [alpha]
        covariates = ["age_over_25"]
    "#;

    #[test]
    fn links_default_by_family() {
        let spec = RunConfig::parse(EXAM).unwrap().model_spec().unwrap();
        assert_eq!(spec.mu.link, Link::Logit);
        assert_eq!(spec.phi.link, Link::Log);
        assert_eq!(spec.alpha.link, Link::Logit);
        assert_eq!(model_covariates(&spec), ["language", "male", "age_over_25"]);

        let gamma = RunConfig::parse("family = 'zaga'\nresponse = 'y'").unwrap().model_spec().unwrap();
        assert_eq!(gamma.mu.link, Link::Log);
    }

    #[test]
    fn unknown_keys_and_names_are_usage_errors() {
        for text in [
            "famly = 'beta'",
            "family = 'weibull'\nresponse = 'y'",
            "family = 'beta'\n[mu]\nlink = 'sqrt'",
            "family = 'beta'\n[mu]\nlink = 'log'",
        ] {
            let err = RunConfig::parse(text).and_then(|c| c.model_spec()).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}: {err}");
        }
    }

    #[test]
    fn kinds_and_bands() {
        let cfg = RunConfig::parse(EXAM).unwrap();
        let k = cfg.kinds(Some(&["rq".into(), "zaqr".into()]), &[]).unwrap();
        assert_eq!(k, [ResidualKind::RandomizedQuantile, ResidualKind::ZAQR]);
        assert_eq!(cfg.kinds(Some(&["nope".into()]), &[]).unwrap_err().exit_code(), 1);
        assert_eq!(parse_band("minmax").unwrap(), Band::MinMax);
        assert_eq!(parse_band("5, 95").unwrap(), Band::Percentile { lower: 5.0, upper: 95.0 });
        assert!(parse_band("5").is_err());
        let cfg = RunConfig::parse("[envelope]\nband = [1.0, 99.0]").unwrap();
        assert_eq!(cfg.envelope_band(None).unwrap(), Band::Percentile { lower: 1.0, upper: 99.0 });
    }

    #[test]
    fn preset_and_custom_scenarios() {
        let cfg = RunConfig::parse("[scenario]\npreset = 'zaig-scenario-1'\nn = 50").unwrap();
        let s = cfg.scenario(None).unwrap();
        assert_eq!((s.name.as_str(), s.n), ("zaig-scenario-1", 50));

        let custom = r#"
            family = "gamma"
            [mu]
            covariates = ["x"]
            [scenario]
            n = 40
            truth = { mu = [0.5, 1.0], phi = [-1.0], alpha = [-1.0] }
            covariates = { rule = "uniform", names = ["x"], lower = 0.0, upper = 1.0, seed = 9 }
        "#;
        let s = RunConfig::parse(custom).unwrap().scenario(None).unwrap();
        assert_eq!(s.n, 40);
        assert_eq!(s.dataset().unwrap().len(), 40);

        let missing = "family = 'gamma'\n[mu]\ncovariates = ['x']\n[scenario]\ntruth = { mu = [0.5, 1.0], phi = [-1.0], alpha = [-1.0] }";
        assert_eq!(RunConfig::parse(missing).unwrap().scenario(None).unwrap_err().exit_code(), 1);
    }
}
