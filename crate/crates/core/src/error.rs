use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong dimensions, out-of-range parameters, broken invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input has the wrong algebraic structure for the requested construction,
    /// e.g. a non-dephasing evolution handed to the field synthesizer.
    #[error("structural error: {0}")]
    Structural(String),

    /// Coherence fell below the synthesis cutoff.
    #[error(
        "coherence too small to synthesize fields: r = {r:e}{}",
        .time.map(|t| format!(" at t = {t}")).unwrap_or_default()
    )]
    Singularity { time: Option<f64>, r: f64 },

    #[error("time {time} outside grid [{start}, {end}]")]
    Range { time: f64, start: f64, end: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported: {0}")]
    Capability(String),

    /// The model produced a non-physical state (e.g. lost positivity).
    #[error("model error: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}
