//! Monte Carlo calibration studies of residual tails.

mod scenario;
mod stats;
mod study;

pub use scenario::{CovariateRule, ScenarioSpec, PRESET_COVARIATE_SEED};
pub use stats::{descriptive_stats, Descriptive};
pub use study::{
    run_study, KindReport, SimMetadata, SimReport, StudyOptions, TailSpec, ThresholdRow,
    MAX_NONCONVERGED_SHARE,
};
