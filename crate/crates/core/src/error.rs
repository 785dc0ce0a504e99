//! Crate-wide error type and result alias.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A coefficient or weight produced a non-finite value during simulation.
    #[error("simulation error on path {path} at step {step}: {what}")]
    Simulation {
        path: usize,
        step: usize,
        what: String,
    },

    /// An operation was asked for on an object missing required state.
    #[error("state error: {0}")]
    State(String),

    /// A Monte Carlo estimator hit a non-finite evaluation.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Too few usable points for a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Exponent arithmetic has no admissible solution under the given inputs.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Bad configuration file or unknown configuration key.
    #[error("config error: {0}")]
    Config(String),

    /// Scenario name not in the registry.
    #[error("unknown scenario: {0}")]
    UnknownScenario(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 usage/config, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) | Error::UnknownScenario(_) => 2,
            _ => 3,
        }
    }
}
