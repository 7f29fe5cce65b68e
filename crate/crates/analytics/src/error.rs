use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("row `{0}` has no label")]
    MissingLabel(String),
    #[error("non-finite value in row `{row}`, column `{column}`")]
    NonFinite { row: String, column: String },
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("{message} (row `{row}`, column `{column}`)")]
    Domain { row: String, column: String, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("feature selection kept no columns")]
    EmptySelection,
    #[error("chi2 scoring needs non-negative features; apply a min-max scaler first")]
    NegativeChi2,
    #[error("model expects features {expected:?}, table is missing {missing:?}")]
    FeatureMismatch { expected: usize, missing: Vec<String> },
    #[error("AUC is undefined: the evaluated rows contain one class")]
    UndefinedAuc,
    #[error("budget too small: {0}")]
    Budget(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
