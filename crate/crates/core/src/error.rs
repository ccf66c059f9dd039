use thiserror::Error;

/// Errors raised by the design library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown model `{0}` (expected M1, M2, M3, M4 or a model file)")]
    UnknownModel(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("design row {row}: point {point:?} is not in the candidate set")]
    UnknownPoint { row: usize, point: Vec<f64> },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("missing reference design for {0}")]
    MissingReference(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
