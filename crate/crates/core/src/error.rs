use thiserror::Error;

/// Errors produced by the library and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad grid spec, unknown scenario kind, missing keys).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two fields were combined that do not live on the same grid.
    #[error("grid mismatch")]
    GridMismatch,

    /// The time stepper blew up (|u|_inf exceeded the instability threshold).
    #[error("solver instability at step {step} (t = {time}): |u|_inf = {sup}")]
    Instability { step: usize, time: f64, sup: f64 },

    /// An iterative method failed to converge.
    #[error("{what} failed to converge after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },

    /// A quadrature or asymptotic evaluation was requested outside its accuracy budget.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// Evaluation too close to a pole of the scattering coefficients.
    #[error("pole error: {0}")]
    Pole(String),

    /// A diagnostic needed more structure in the data than was present.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Two routes that must agree disagreed beyond tolerance.
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
