use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("window construction failed: {0}")]
    Construction(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("function degree {degree} exceeds frame capacity {capacity}")]
    Bandwidth { degree: usize, capacity: usize },

    #[error("time ordering violated: t2 = {t2} < t1 = {t1}")]
    Ordering { t1: f64, t2: f64 },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("cannot select {requested} centers out of {available}")]
    Infeasible { requested: usize, available: usize },

    #[error("center separation {separation} violates the net condition (minimum {required})")]
    Separation { separation: f64, required: f64 },

    #[error("invalid regime: {0}")]
    Regime(String),

    #[error("need at least {required} samples, got {got}")]
    SampleSize { required: usize, got: usize },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0})")]
    NotPsd(f64),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("density violates the bounded-away-from-zero condition: {0}")]
    Ava(String),

    #[error("invalid parameter: {0}")]
    Invalid(String),
}

impl Error {
    /// True for failures of numerical convergence (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::Construction(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
