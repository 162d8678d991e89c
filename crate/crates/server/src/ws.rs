use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket};
use beergame_core::session::{PlayerId, SessionState, PROTOCOL_VERSION};
use beergame_core::Role;
use serde::Deserialize;
use serde_json::json;

use crate::error::ApiError;
use crate::registry::SessionHandle;

/// Messages a client may send. Every server message is either a
/// `ViewPayload` or an `ack` / `error` envelope, all carrying `"v": 1`.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ClientMessage {
    Order {
        player_id: PlayerId,
        week: u32,
        quantity: u64,
    },
    Refresh,
}

fn view_message(state: &SessionState, role: Role) -> Message {
    let text = serde_json::to_string(&state.state_view(role)).expect("views serialize");
    Message::Text(text.into())
}

fn error_message(err: &ApiError) -> Message {
    let mut body = err.body();
    body["v"] = json!(PROTOCOL_VERSION);
    body["type"] = json!("error");
    body["status"] = json!(err.status.as_u16());
    Message::Text(body.to_string().into())
}

pub async fn run(mut socket: WebSocket, handle: Arc<SessionHandle>, role: Role) {
    let mut updates = handle.subscribe();
    let first = view_message(&updates.borrow_and_update(), role);
    if socket.send(first).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            changed = updates.changed() => {
                if changed.is_err() {
                    break;
                }
                let msg = view_message(&updates.borrow_and_update(), role);
                if socket.send(msg).await.is_err() {
                    break;
                }
            }
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let reply = match handle_client(&handle, role, text.as_str()).await {
                    Ok(Some(msg)) => msg,
                    Ok(None) => continue,
                    Err(e) => error_message(&e),
                };
                if socket.send(reply).await.is_err() {
                    break;
                }
            }
        }
    }
}

async fn handle_client(
    handle: &SessionHandle,
    role: Role,
    text: &str,
) -> Result<Option<Message>, ApiError> {
    let msg: ClientMessage = serde_json::from_str(text).map_err(ApiError::from_json)?;
    match msg {
        ClientMessage::Refresh => Ok(Some(view_message(&handle.snapshot(), role))),
        ClientMessage::Order {
            player_id,
            week,
            quantity,
        } => {
            let ack = handle
                .apply(|s| s.submit_order(&player_id, week, quantity))
                .await?;
            let mut body = serde_json::to_value(ack).expect("acks serialize");
            body["v"] = json!(PROTOCOL_VERSION);
            body["type"] = json!("ack");
            Ok(Some(Message::Text(body.to_string().into())))
        }
    }
}
