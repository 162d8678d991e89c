//! HTTP + WebSocket host for live sessions.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/sessions` | optional `{"config": GameConfig}` |
//! | POST | `/sessions/{id}/join` | `{"role", "player_name"}` |
//! | POST | `/sessions/{id}/start` | none |
//! | POST | `/sessions/{id}/orders` | `{"player_id", "week", "quantity"}` |
//! | GET | `/sessions/{id}/view` | `?role=R` |
//! | GET | `/sessions/{id}/export.csv` | none |
//! | GET | `/sessions/{id}/ws` | `?role=R`, WebSocket upgrade |

mod error;
mod registry;
mod ws;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::ws::WebSocketUpgrade;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use beergame_core::record::to_csv_string;
use beergame_core::session::{OrderAck, Phase, PlayerId, SessionId, ViewPayload};
use beergame_core::{GameConfig, Role};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use error::ApiError;
pub use registry::{Registry, SessionHandle};

pub fn router(registry: Arc<Registry>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/join", post(join))
        .route("/sessions/{id}/start", post(start))
        .route("/sessions/{id}/orders", post(submit_order))
        .route("/sessions/{id}/view", get(view))
        .route("/sessions/{id}/export.csv", get(export_csv))
        .route("/sessions/{id}/ws", get(websocket))
        .with_state(registry)
}

pub async fn serve(
    listener: tokio::net::TcpListener,
    registry: Arc<Registry>,
) -> std::io::Result<()> {
    axum::serve(listener, router(registry)).await
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(ApiError::from_json)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub config: Option<GameConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: SessionId,
    pub phase: Phase,
    pub config: GameConfig,
}

async fn create(State(reg): State<Arc<Registry>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = if body.iter().all(u8::is_ascii_whitespace) {
        CreateRequest::default()
    } else {
        parse_body(&body)?
    };
    let config = req.config.unwrap_or_else(|| reg.default_config().clone());
    let handle = reg.create(config)?;
    let s = handle.snapshot();
    let resp = CreateResponse {
        session_id: s.session_id().clone(),
        phase: s.phase(),
        config: s.config().clone(),
    };
    Ok((StatusCode::CREATED, Json(resp)).into_response())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JoinRequest {
    pub role: Role,
    pub player_name: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JoinResponse {
    pub session_id: SessionId,
    pub role: Role,
    pub player_id: PlayerId,
}

async fn join(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<JoinResponse>, ApiError> {
    let handle = reg.get(&id)?;
    let req: JoinRequest = parse_body(&body)?;
    let player_id = handle.apply(|s| s.join(req.role, &req.player_name)).await?;
    Ok(Json(JoinResponse {
        session_id: SessionId::from(id),
        role: req.role,
        player_id,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StartResponse {
    pub phase: Phase,
    pub weeks_played: u32,
}

async fn start(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
) -> Result<Json<StartResponse>, ApiError> {
    let handle = reg.get(&id)?;
    let (phase, weeks_played) = handle
        .apply(|s| {
            s.start()?;
            Ok((s.phase(), s.game().week()))
        })
        .await?;
    Ok(Json(StartResponse {
        phase,
        weeks_played,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OrderRequest {
    pub player_id: PlayerId,
    pub week: u32,
    pub quantity: u64,
}

async fn submit_order(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<OrderAck>, ApiError> {
    let handle = reg.get(&id)?;
    let req: OrderRequest = parse_body(&body)?;
    let ack = handle
        .apply(|s| s.submit_order(&req.player_id, req.week, req.quantity))
        .await?;
    Ok(Json(ack))
}

#[derive(Debug, Deserialize)]
struct RoleQuery {
    role: Option<String>,
}

fn parse_role(q: &RoleQuery) -> Result<Role, ApiError> {
    let raw = q.role.as_deref().ok_or_else(|| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "missing_role",
            "query parameter `role` is required",
        )
    })?;
    raw.parse().map_err(|_| ApiError::bad_role(raw))
}

async fn view(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
    Query(q): Query<RoleQuery>,
) -> Result<Json<ViewPayload>, ApiError> {
    let handle = reg.get(&id)?;
    let role = parse_role(&q)?;
    Ok(Json(handle.snapshot().state_view(role)))
}

async fn export_csv(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let handle = reg.get(&id)?;
    let csv = to_csv_string(handle.snapshot().records());
    let disposition = format!("attachment; filename=\"{id}.csv\"");
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8".to_owned()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        csv,
    )
        .into_response())
}

async fn websocket(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
    Query(q): Query<RoleQuery>,
    upgrade: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let handle = reg.get(&id)?;
    let role = parse_role(&q)?;
    Ok(upgrade.on_upgrade(move |socket| ws::run(socket, handle, role)))
}
