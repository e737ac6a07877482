//! Crate-wide error type.
//!
//! Errors split into two broad classes that the CLI maps onto exit codes:
//! configuration/validation problems (exit 2) and numerical failures that
//! occur after inputs were accepted (exit 3).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("jet order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("singular interface system{}", fmt_at(.interface, .lambda))]
    SingularSystem {
        interface: Option<usize>,
        lambda: Option<f64>,
    },

    #[error("incompatible interface system{}", fmt_at(.interface, &None))]
    IncompatibleSystem { interface: Option<usize> },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("medium construction: {0}")]
    Construction(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("ill-conditioned fit (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("amplification overflow at lambda = {lambda}")]
    AmplificationOverflow { lambda: f64 },

    #[error("internal consistency: {0}")]
    InternalConsistency(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_at(interface: &Option<usize>, lambda: &Option<f64>) -> String {
    let mut s = String::new();
    if let Some(k) = interface {
        s.push_str(&format!(" at interface {k}"));
    }
    if let Some(l) = lambda {
        s.push_str(&format!(" (lambda = {l})"));
    }
    s
}

impl Error {
    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::OrderMismatch { .. }
            | Error::OutOfRange(_)
            | Error::OutOfDomain(_)
            | Error::Construction(_)
            | Error::NotImplemented(_)
            | Error::GridMismatch(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
