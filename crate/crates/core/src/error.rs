use thiserror::Error;

/// Errors raised by the geometric and statistical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a numeric precondition (non-unit axis, ‖v‖ ≥ 1, c ≤ 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix or quaternion failed its structural checks.
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested quantity is undefined for these inputs (antipodal axes, tied eigenvalues, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A frame's tangent left the open hemisphere t₁ > 0.
    #[error("section {index}: tangent outside the forward hemisphere (t1 = {t1})")]
    Hemisphere { index: usize, t1: f64 },

    /// The ETRep failed validation.
    #[error("invalid ETRep; failing sections: {failing:?}")]
    InvalidRep { failing: Vec<usize> },

    /// Two representations have different numbers of sections.
    #[error("section count mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    Empty(String),

    /// Schema violation in a serialized document. `pointer` is a JSON pointer.
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
