//! Runs a whole session against the router in process, answering like a
//! decision maker who prefers gains near Kp = 1.2, Ki = 0.3.
//!
//! cargo run --example scripted_session

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request};
use gmrs_service::{router, Progress, SessionCreated, Store};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: Method, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::main]
async fn main() {
    let app = router(Arc::new(Store::in_memory()));
    let problem = json!({
        "name": "PI tuning",
        "coordinates": [
            {"label": "Kp", "lower": 0.0, "upper": 3.0},
            {"label": "Ki", "lower": 0.0, "upper": 1.0}
        ]
    });
    let created: SessionCreated = serde_json::from_value(
        call(
            &app,
            Method::POST,
            "/sessions",
            json!({"problem": problem, "config": {"n_max": 25}}),
        )
        .await,
    )
    .unwrap();
    let id = created.id;
    let taste = |v: &[f64]| (v[0] - 1.2).powi(2) + 4.0 * (v[1] - 0.3).powi(2);

    let mut progress = created.progress;
    while let Progress::Pending { query } = progress {
        let answer = if taste(&query.left.values) < taste(&query.right.values) {
            "left"
        } else {
            "right"
        };
        println!(
            "{}: {:.3?} vs {:.3?} -> {answer}",
            query.token, query.left.values, query.right.values
        );
        let body = json!({"answer": answer, "token": query.token});
        progress = serde_json::from_value(call(&app, Method::POST, &format!("/sessions/{id}/preference"), body).await)
            .unwrap();
    }
    if let Progress::Finished { best, history } = progress {
        println!("best after {} answers: {:?}", history.len(), best.x.labeled);
    }
}
