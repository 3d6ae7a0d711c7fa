use std::path::PathBuf;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

/// Startup and configuration failures.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("invalid service config: {0}")]
    Config(String),
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("cannot load index: {0}")]
    Load(#[source] expertfind_core::Error),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: std::net::SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server failed: {0}")]
    Serve(#[source] std::io::Error),
}

/// Stable machine-readable error codes carried in every error body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    EmptyQuery,
    OovQuery,
    BadConfig,
    BadRequest,
    BadDecision,
    IndexNotLoaded,
    SessionNotFound,
    OutOfOrder,
    DuplicateVerdict,
    SessionComplete,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 11] = [
        ErrorCode::EmptyQuery,
        ErrorCode::OovQuery,
        ErrorCode::BadConfig,
        ErrorCode::BadRequest,
        ErrorCode::BadDecision,
        ErrorCode::IndexNotLoaded,
        ErrorCode::SessionNotFound,
        ErrorCode::OutOfOrder,
        ErrorCode::DuplicateVerdict,
        ErrorCode::SessionComplete,
        ErrorCode::Internal,
    ];

    pub fn status(self) -> StatusCode {
        match self {
            Self::EmptyQuery | Self::OovQuery | Self::BadConfig | Self::BadRequest => {
                StatusCode::BAD_REQUEST
            }
            Self::BadDecision => StatusCode::UNPROCESSABLE_ENTITY,
            Self::IndexNotLoaded => StatusCode::SERVICE_UNAVAILABLE,
            Self::SessionNotFound => StatusCode::NOT_FOUND,
            Self::OutOfOrder | Self::DuplicateVerdict => StatusCode::CONFLICT,
            Self::SessionComplete => StatusCode::GONE,
            Self::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn session_not_found(id: &str) -> Self {
        Self::new(ErrorCode::SessionNotFound, format!("no session {id:?}"))
    }
}

impl From<expertfind_core::Error> for ApiError {
    fn from(err: expertfind_core::Error) -> Self {
        use expertfind_core::Error as E;
        let code = match &err {
            E::EmptyQuery => ErrorCode::EmptyQuery,
            E::EmptyRepresentation => ErrorCode::OovQuery,
            E::RegimeUnavailable(_) | E::EmbeddingsRequired => ErrorCode::BadConfig,
            E::OutOfOrder { .. } | E::VerdictRequired => ErrorCode::OutOfOrder,
            E::DuplicateVerdict(_) => ErrorCode::DuplicateVerdict,
            E::SessionComplete => ErrorCode::SessionComplete,
            // An index with no authors is rejected at load, so this only
            // means nothing could be ranked for the query.
            E::NoCandidates => ErrorCode::OovQuery,
            _ => ErrorCode::Internal,
        };
        if code == ErrorCode::Internal {
            tracing::error!(error = %err, "request failed");
        }
        Self::new(code, err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code,
            message: self.message,
        };
        (self.code.status(), Json(body)).into_response()
    }
}
