use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use beergame_core::session::SessionError;
use serde::Serialize;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_session",
            format!("no session `{id}`"),
        )
    }

    pub fn bad_role(raw: &str) -> Self {
        Self::new(
            StatusCode::BAD_REQUEST,
            "unknown_role",
            format!("unknown role `{raw}`"),
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    /// Malformed JSON is a 400; well-formed JSON of the wrong shape a 422.
    pub fn from_json(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Data => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_body",
                err.to_string(),
            ),
            _ => Self::new(StatusCode::BAD_REQUEST, "malformed_body", err.to_string()),
        }
    }

    pub fn body(&self) -> serde_json::Value {
        serde_json::to_value(Body {
            error: self.code,
            message: &self.message,
        })
        .expect("plain strings serialize")
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let (status, code) = match &e {
            SessionError::InvalidConfig(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_config"),
            SessionError::SeatTaken(_) => (StatusCode::CONFLICT, "seat_taken"),
            SessionError::WrongPhase { .. } => (StatusCode::CONFLICT, "wrong_phase"),
            SessionError::UnknownPlayer => (StatusCode::FORBIDDEN, "unknown_player"),
            SessionError::StaleTurn { .. } => (StatusCode::CONFLICT, "stale_turn"),
            SessionError::Finished => (StatusCode::CONFLICT, "finished"),
            SessionError::Replay(_) | SessionError::Engine(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}
