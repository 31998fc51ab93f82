use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix shape {rows}x{cols} does not match {len} values")]
    Shape { rows: usize, cols: usize, len: usize },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("column {col} has zero mean and cannot be normalized")]
    ZeroMeanColumn { col: usize },

    #[error("every column is dead (all responses zero)")]
    AllColumnsDead,

    #[error("requested {requested} {what} but only {available} available")]
    OutOfBounds {
        what: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("vector has zero variance")]
    DegenerateVariance,

    #[error("need at least {needed} exceedances, got {got}")]
    TooFewExceedances { needed: usize, got: usize },

    #[error("all exceedances are equal")]
    DegenerateTail,

    #[error("matrix has zero total variance")]
    ZeroTotalVariance,

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("no vector produced a valid estimate")]
    EmptySummary,

    #[error("fit did not reach the error threshold (relative rmse {relative_rmse})")]
    NotConverged { relative_rmse: f64 },
}

impl Error {
    /// True for failures caused by degenerate or insufficient input data,
    /// as opposed to malformed arguments or optimizer failure.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::ZeroMeanColumn { .. }
                | Error::AllColumnsDead
                | Error::InsufficientData { .. }
                | Error::DegenerateVariance
                | Error::TooFewExceedances { .. }
                | Error::DegenerateTail
                | Error::ZeroTotalVariance
                | Error::InsufficientPoints { .. }
                | Error::EmptySummary
        )
    }
}
