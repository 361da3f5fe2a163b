//! Zero-adjusted regression (ZAR) models.
//!
//! A ZAR model describes a response with a point mass at zero and a
//! continuous distribution on the positive values. Each of the three
//! parameters (the mean `μ` and dispersion `φ` of the continuous part, and
//! the zero probability `α`) has its own linked linear predictor.
//!
//! The crate is organized as:
//!
//! - [`distributions`]: Beta, Gamma and inverse Gaussian families in mean /
//!   dispersion form, the zero-adjusted mixture, and the standard normal.
//! - [`model`]: model specification, likelihood, maximum likelihood fitting,
//!   prediction and Wald tests.
//! - [`residuals`]: component residuals, the randomized quantile residual, the
//!   star transform and its quantile version (ZAQR), and half-normal envelopes.
//! - [`simulation`]: a Monte Carlo harness that tallies residual tail
//!   exceedances across replicated fits.
//! - [`synthetic`]: a generator for a labeled synthetic exam-score dataset.

pub mod distributions;
pub mod error;
pub mod model;
pub mod residuals;
pub mod rng;
pub mod simulation;
pub mod synthetic;

pub use distributions::{ContinuousFamily, MeanDispersionParams, ZeroAdjusted, ZeroAdjustedParams};
pub use error::{Result, ZarError};
pub use model::{fit, Coefficients, Dataset, FitOptions, Fitter, Link, SubmodelSpec, ZarFit, ZarModelSpec};
pub use residuals::{ComponentKind, ResidualKind, ResidualVector};
pub use simulation::{run_study, ScenarioSpec, SimReport, StudyOptions};
