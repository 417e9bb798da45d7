use std::path::PathBuf;

/// Everything that can go wrong in the library, grouped by the kind of
/// contract that was broken.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside the range where the model is defined.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// A matrix failed a numerical validity check (PSD, factorization).
    #[error("invalid matrix: {0}")]
    Validity(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Input is well-formed but leaves nothing to compute with.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("shape mismatch: expected {expected} columns, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("ingestion error in {path} at row {row}, column `{column}`: {message}")]
    Ingestion {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error(
        "unsupported classes: label column `{column}` has {count} distinct values, need exactly 2"
    )]
    UnsupportedClasses { column: String, count: usize },

    #[error("model text: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        // Bound first so NaN comparisons fail the check.
        let holds: bool = $cond;
        if !holds {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
