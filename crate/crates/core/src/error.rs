use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("q2 solver did not converge after {iterations} iterations (last residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("q2 fixed-point iterate {fixed_point} and bisection root {bisection} disagree by more than {tolerance:e}")]
    Ambiguity {
        fixed_point: f64,
        bisection: f64,
        tolerance: f64,
    },

    #[error("covariance model construction failed: {0}")]
    ModelConstruction(String),

    #[error("covariance matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    ModelInconsistency { min_eigenvalue: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("monomial degree {degree} exceeds the supported maximum {max}")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
