use thiserror::Error;

/// Errors produced by `zar-core`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZarError {
    /// An argument fell outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A design matrix does not have full column rank.
    #[error("design matrix for the {submodel} submodel is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient {
        submodel: String,
        columns: Vec<String>,
    },

    #[error("all positive responses are equal ({0}); the continuous part cannot be estimated")]
    ConstantResponse(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The covariance matrix is unavailable or has a negative variance.
    #[error("covariance matrix is not positive semidefinite ({0}); the fit may not have converged")]
    NonPsdCovariance(String),

    #[error("weighted cross-product matrix is singular: {0}")]
    Singular(String),

    #[error("residual kind {kind} is not available: {reason}")]
    UnsupportedResidual { kind: String, reason: String },

    #[error("too many non-convergent replications: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, ZarError>;
