use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("insufficient grid resolution: {0}")]
    Resolution(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration did not converge: {0}")]
    Integration(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("matrix assembly failed: {0}")]
    Assembly(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A tabulated closed-form identity was not reproduced.
    #[error("identity {identity} failed at coefficient ({l},{m}): expected {expected}, got {actual}")]
    Identity { identity: String, l: usize, m: i32, expected: f64, actual: f64 },

    #[error("formula regression for {metric} at r = {r}: {detail}")]
    FormulaRegression { metric: String, r: f64, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
