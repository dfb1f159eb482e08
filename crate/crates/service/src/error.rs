use axum::{
    http::StatusCode,
    response::{IntoResponse, Response},
    Json,
};
use serde::Serialize;
use thiserror::Error;
use trip_core::CryptoError;
use trip_ledger::LedgerError;
use trip_protocol::ProtocolError;
use trip_sim::SimError;
use trip_tally::TallyError;

/// Startup and configuration failures.
#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A structured 4xx/5xx reply: `{"error": code, "message": text}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { error: self.code, message: &self.message };
        (self.status, Json(body)).into_response()
    }
}

impl From<ProtocolError> for ApiError {
    fn from(e: ProtocolError) -> Self {
        let status = match &e {
            ProtocolError::WrongPhase { .. } | ProtocolError::EnvelopeReuse | ProtocolError::NoRealCredential => {
                StatusCode::CONFLICT
            }
            ProtocolError::UnknownVoter(_) | ProtocolError::UnknownEntity(_) | ProtocolError::UnknownCandidate(_) => {
                StatusCode::NOT_FOUND
            }
            ProtocolError::Crypto(_) => StatusCode::BAD_REQUEST,
            ProtocolError::Ledger(_) => StatusCode::CONFLICT,
            ProtocolError::NoElectionKey | ProtocolError::TooManyKeys(_) | ProtocolError::KeyFile(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<CryptoError> for ApiError {
    fn from(e: CryptoError) -> Self {
        Self::bad_request("malformed", e.to_string())
    }
}

impl From<LedgerError> for ApiError {
    fn from(e: LedgerError) -> Self {
        Self::new(StatusCode::CONFLICT, "ledger", e.to_string())
    }
}

impl From<TallyError> for ApiError {
    fn from(e: TallyError) -> Self {
        let status = match &e {
            TallyError::UnknownEvent(_) => StatusCode::NOT_FOUND,
            TallyError::InvalidOption(_) => StatusCode::BAD_REQUEST,
            TallyError::NoElectionKey => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<SimError> for ApiError {
    fn from(e: SimError) -> Self {
        let status = match &e {
            SimError::InvalidConfig(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.code(), e.to_string())
    }
}
