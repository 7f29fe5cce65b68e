use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub type ApiResult<T> = std::result::Result<T, ApiError>;

/// Wire form of every error response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub details: Value,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub details: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, code: code.into(), message: message.into(), details: Value::Null }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn conflict(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }

    pub fn unprocessable(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody { code: self.code.clone(), message: self.message.clone(), details: self.details.clone() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<radiowb_core::Error> for ApiError {
    fn from(e: radiowb_core::Error) -> Self {
        use radiowb_core::Error as E;
        let message = e.to_string();
        match e {
            E::InvalidPolygon { slice, .. } => {
                Self::unprocessable("invalid-polygon", message).with_details(json!({"slice": slice}))
            }
            E::SliceOutOfRange { index, depth } => {
                Self::unprocessable("slice-out-of-range", message).with_details(json!({"index": index, "depth": depth}))
            }
            E::EmptyMask => Self::unprocessable("empty-mask", message),
            E::EmptySeeds => Self::unprocessable("empty-seeds", message),
            E::InvalidParameter(_) => Self::unprocessable("invalid-parameter", message),
            E::UnknownRoi(id) => Self::not_found("unknown-roi", message).with_details(json!({"roi_id": id})),
            E::UnknownSeries(id) => Self::not_found("unknown-series", message).with_details(json!({"series_id": id})),
            E::CrossStudy(ids) => Self::unprocessable("cross-study", message).with_details(json!({"ids": ids})),
            E::InvalidVolume(_) | E::MalformedHeader(_) | E::SizeMismatch { .. } | E::NonFinite(_) => {
                Self::unprocessable("invalid-volume", message)
            }
            E::DimsMismatch { .. } => Self::unprocessable("dims-mismatch", message),
            E::Cancelled => Self::conflict("cancelled", message),
            E::Io(_) | E::Json(_) => Self::internal(message),
        }
    }
}

impl From<radiowb_graph::Error> for ApiError {
    fn from(e: radiowb_graph::Error) -> Self {
        use radiowb_graph::Error as E;
        let message = e.to_string();
        match e {
            E::Invalid(diagnostics) => {
                Self::unprocessable("invalid-graph", message).with_details(json!({"diagnostics": diagnostics}))
            }
            E::RecordNotFound(id) => {
                Self::not_found("unknown-experiment", message).with_details(json!({"record_id": id}))
            }
            E::NoEvaluation(_) => Self::unprocessable("no-evaluation", message),
            E::MissingColumns(columns) => {
                Self::unprocessable("missing-columns", message).with_details(json!({"columns": columns}))
            }
            E::Analytics(_) => Self::unprocessable("analytics", message),
            E::ModelNotFound(_) | E::Json(_) | E::Io(_) => Self::internal(message),
        }
    }
}
