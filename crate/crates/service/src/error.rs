use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use gmrs::GmrsError;
use serde::{Deserialize, Serialize};

/// Error body of every failed request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "validation_error", message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no session `{id}`"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", message)
    }
}

impl From<GmrsError> for ApiError {
    fn from(e: GmrsError) -> Self {
        let message = e.to_string();
        match e {
            GmrsError::InvalidArgument(_) | GmrsError::DimensionMismatch { .. } | GmrsError::WrongAnswerKind(_) => {
                Self::validation(message)
            }
            GmrsError::NoPendingQuery => Self::new(StatusCode::CONFLICT, "no_pending_query", message),
            GmrsError::StaleQuery { .. } => Self::new(StatusCode::CONFLICT, "stale_token", message),
            GmrsError::TieNotSupported => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "tie_not_supported",
                "the GP surrogate models strict preferences only; answer left or right",
            ),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "optimizer_error", message),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(e.status(), "invalid_body", e.body_text())
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        Self::internal(format!("storage failure: {e}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code.to_owned(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}
