use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("not found: {0}")]
    NotFound(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("bad request: {0}")]
    BadRequest(String),

    #[error("image source failed: {message}")]
    Upstream { message: String, retry: String },

    #[error("classification failed: {0}")]
    Inference(String),

    #[error("storage error: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Shape(_) => "shape",
            ServiceError::Parse(_) => "parse",
            ServiceError::InvalidMask(_) => "invalid_mask",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Upstream { .. } => "upstream",
            ServiceError::Inference(_) => "inference",
            ServiceError::Storage(_) => "storage",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Shape(_) | ServiceError::InvalidMask(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Parse(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Upstream { .. } => StatusCode::BAD_GATEWAY,
            ServiceError::Inference(_) | ServiceError::Storage(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl From<xai_core::Error> for ServiceError {
    fn from(err: xai_core::Error) -> Self {
        use xai_core::Error as E;
        match err {
            E::Shape { .. } | E::InvalidDimension { .. } => ServiceError::Shape(err.to_string()),
            E::Parse(_) | E::Decode(_) => ServiceError::Parse(err.to_string()),
            E::InvalidMask(_) => ServiceError::InvalidMask(err.to_string()),
            E::Argument(_) | E::InvalidStroke(_) => ServiceError::BadRequest(err.to_string()),
            E::Numeric(_) | E::Inference(_) | E::Load(_) => ServiceError::Inference(err.to_string()),
        }
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(err: std::io::Error) -> Self {
        ServiceError::Storage(err.to_string())
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(err: serde_json::Error) -> Self {
        ServiceError::Storage(err.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    retry: Option<&'a str>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let retry = match &self {
            ServiceError::Upstream { retry, .. } => Some(retry.as_str()),
            _ => None,
        };
        let body = ErrorBody {
            error: self.kind(),
            message: self.to_string(),
            retry,
        };
        (self.status(), Json(body)).into_response()
    }
}
