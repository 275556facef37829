use thiserror::Error;

/// Errors raised by the ISAC toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsacError {
    #[error("invalid configuration: {key}: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("empty receiver group")]
    EmptyGroup,

    #[error("receiver index {index} out of range for {count} receivers")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    QuadratureNonConvergence { estimate: f64 },

    #[error("singular Fisher information (denominator {denominator:e})")]
    SingularFim { denominator: f64 },

    #[error("no receiver group satisfies the rate and cost constraints")]
    NoFeasibleGroup,

    #[error("no strictly feasible beamformer found: {0}")]
    InfeasibleStart(String),

    #[error("convex subproblem is infeasible: {0}")]
    InfeasibleSubproblem(String),

    #[error("solver did not converge: {0}")]
    SolverNonConvergence(String),

    #[error("singular interference covariance for receiver {0}")]
    SingularCovariance(usize),

    #[error("degenerate angles: {0}")]
    DegenerateAngles(String),

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T, E = IsacError> = std::result::Result<T, E>;

impl IsacError {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        IsacError::InvalidConfig {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
