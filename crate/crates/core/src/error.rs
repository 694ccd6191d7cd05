use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The vertex list does not describe a valid polygon.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("curve is not simple: {0}")]
    NotSimple(String),

    #[error("points coincide")]
    CoincidentPoints,

    #[error("arclength {s} out of range [0, {length}]")]
    OutOfRange { s: f64, length: f64 },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    /// Generator parameters that cannot produce an embedded curve.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
