#![allow(dead_code)]

use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cpcboard::{Event, Registry};
use futures::StreamExt;
use http_body_util::BodyExt;
use serde_json::Value as Json;
use tower::ServiceExt;

pub fn registry() -> (tempfile::TempDir, Registry) {
    let dir = tempfile::tempdir().unwrap();
    let registry = Registry::new(dir.path()).unwrap();
    (dir, registry)
}

/// Events after `from` until the stream ends, failing after 30 s.
pub async fn collect(registry: &Registry, run_id: &str, from: u64) -> Vec<Event> {
    let stream = registry.subscribe(run_id, from).unwrap();
    tokio::time::timeout(Duration::from_secs(30), stream.collect::<Vec<_>>())
        .await
        .expect("stream ends after run_completed")
}

pub async fn send(app: &Router, req: Request<Body>) -> (StatusCode, String) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(body.to_vec()).unwrap())
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, String) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn get_json(app: &Router, uri: &str) -> (StatusCode, Json) {
    let (status, body) = get(app, uri).await;
    (status, serde_json::from_str(&body).unwrap_or(Json::Null))
}

pub async fn post_json(app: &Router, uri: &str, body: &Json) -> (StatusCode, Json) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, body) = send(app, req).await;
    (status, serde_json::from_str(&body).unwrap_or(Json::Null))
}

/// `(event name, data)` per blank-line delimited SSE frame; comment-only
/// frames are dropped.
pub fn parse_sse(text: &str) -> Vec<(String, Json)> {
    text.split("\n\n")
        .filter_map(|frame| {
            let mut name = None;
            let mut data = String::new();
            for line in frame.lines() {
                if let Some(v) = line.strip_prefix("event:") {
                    name = Some(v.trim().to_string());
                } else if let Some(v) = line.strip_prefix("data:") {
                    data.push_str(v.strip_prefix(' ').unwrap_or(v));
                }
            }
            Some((name?, serde_json::from_str(&data).ok()?))
        })
        .collect()
}

pub fn check_contract(seqs: &[(String, u64)], n: u64) -> Result<(), String> {
    let expected: Vec<u64> = (1..=n + 1).collect();
    let got: Vec<u64> = seqs.iter().map(|s| s.1).collect();
    if got != expected {
        return Err(format!("seqs {got:?}, expected 1..={}", n + 1));
    }
    let completed = seqs.iter().filter(|s| s.0 == "run_completed").count();
    if completed != 1 || seqs.last().map(|s| s.0.as_str()) != Some("run_completed") {
        return Err(format!("{completed} run_completed events, or not last"));
    }
    Ok(())
}
