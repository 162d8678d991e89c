use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use beergame_core::session::{read_log, SessionState};
use beergame_core::GameConfig;
use beergame_server::{router, Registry};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn post(app: &axum::Router, uri: &str, body: Value) -> Value {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert!(resp.status().is_success(), "{uri}: {}", resp.status());
    serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap()
}

async fn get(app: &axum::Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let resp = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    (
        status,
        resp.into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec(),
    )
}

#[tokio::test]
async fn crash_restart_restores_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let (registry, skipped) =
        Registry::restore(GameConfig::default(), dir.path().to_owned()).unwrap();
    assert!(skipped.is_empty() && registry.is_empty());
    let app = router(Arc::new(registry));

    let id = post(&app, "/sessions", json!({})).await["session_id"]
        .as_str()
        .unwrap()
        .to_owned();
    let player = post(
        &app,
        &format!("/sessions/{id}/join"),
        json!({"role": "distributor", "player_name": "d"}),
    )
    .await["player_id"]
        .as_str()
        .unwrap()
        .to_owned();
    post(&app, &format!("/sessions/{id}/start"), json!({})).await;
    for week in 1..=5 {
        post(
            &app,
            &format!("/sessions/{id}/orders"),
            json!({"player_id": player, "week": week, "quantity": week}),
        )
        .await;
    }
    let (_, before) = get(&app, &format!("/sessions/{id}/view?role=distributor")).await;
    drop(app);

    // simulate a crash mid-write
    let log = dir.path().join(format!("{id}.jsonl"));
    let mut raw = std::fs::read_to_string(&log).unwrap();
    raw.push_str("{\"type\":\"order_submitted\",\"ro");
    std::fs::write(&log, raw).unwrap();
    std::fs::write(
        dir.path().join("garbage.jsonl"),
        "{\"type\":\"game_started\"}\n",
    )
    .unwrap();

    let (registry, skipped) =
        Registry::restore(GameConfig::default(), dir.path().to_owned()).unwrap();
    assert_eq!(registry.len(), 1);
    assert_eq!(skipped.len(), 1);
    let app = router(Arc::new(registry));
    let (status, after) = get(&app, &format!("/sessions/{id}/view?role=distributor")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(before, after);

    // the restored session keeps playing and logging
    let ack = post(
        &app,
        &format!("/sessions/{id}/orders"),
        json!({"player_id": player, "week": 6, "quantity": 1}),
    )
    .await;
    assert_eq!(ack["weeks_played"], 6);
    let events = read_log(&log).unwrap();
    let replayed = SessionState::replay(&events).unwrap();
    assert_eq!(replayed.records().len(), 6);
}
