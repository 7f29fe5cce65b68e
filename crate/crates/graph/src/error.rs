use thiserror::Error;

use crate::validate::Diagnostic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is invalid ({} problem(s))", .0.len())]
    Invalid(Vec<Diagnostic>),

    #[error("experiment `{0}` not found")]
    RecordNotFound(String),

    #[error("model `{0}` not found in the model store")]
    ModelNotFound(String),

    #[error("no evaluation node to retest: {0}")]
    NoEvaluation(String),

    #[error("table is missing {} feature column(s): {}", .0.len(), .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error(transparent)]
    Analytics(radiowb_analytics::Error),

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<radiowb_analytics::Error> for Error {
    fn from(e: radiowb_analytics::Error) -> Self {
        match e {
            radiowb_analytics::Error::FeatureMismatch { missing, .. } => Error::MissingColumns(missing),
            other => Error::Analytics(other),
        }
    }
}
