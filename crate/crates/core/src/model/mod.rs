//! Model specification, likelihood, fitting, prediction and Wald tests.

mod data;
pub(crate) mod fit;
pub(crate) mod frame;
mod likelihood;
mod link;
pub mod optim;
mod spec;
mod wald;

pub use data::Dataset;
pub use fit::{
    fit, predict, Convergence, Degeneracy, FitOptions, Fitter, GradientMode, StartStrategy, ZarFit,
};
pub use likelihood::{log_likelihood, Coefficients, PENALTY_LOGLIK};
pub use link::{Link, ParamRange, UNIT_GUARD};
pub use spec::{Submodel, SubmodelSpec, ZarModelSpec, INTERCEPT};
pub use wald::{two_sided_p, wald_tests, WaldRow};
