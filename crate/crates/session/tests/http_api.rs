use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use xai_core::{ImageBuffer, Mask, ModelHandle, Pipeline, Preprocessing};
use xai_session::{router, ServiceOptions, SessionService};

const BOUNDARY: &str = "xai-test-boundary";

fn app() -> Router {
    let corpus = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets/corpus");
    let svc = SessionService::new(
        Pipeline::new(ModelHandle::stub(), Preprocessing::DirectResize),
        ServiceOptions {
            corpus_dir: Some(corpus),
            ..Default::default()
        },
    )
    .unwrap();
    router(Arc::new(svc))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

async fn send_json(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let (status, body) = send(app, req).await;
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post_json(uri: &str, body: Value) -> Request<Body> {
    Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn multipart(uri: &str, parts: &[(&str, &str, &[u8])]) -> Request<Body> {
    let mut body = Vec::new();
    for (name, content_type, bytes) in parts {
        body.extend_from_slice(
            format!(
                "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\nContent-Type: {content_type}\r\n\r\n"
            )
            .as_bytes(),
        );
        body.extend_from_slice(bytes);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    Request::post(uri)
        .header(
            header::CONTENT_TYPE,
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(Body::from(body))
        .unwrap()
}

async fn create(app: &Router) -> Value {
    let (status, body) = send_json(
        app,
        post_json("/sessions", json!({"source": "local_corpus", "selector": "golden_retriever"})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body
}

#[tokio::test]
async fn health_and_corpus() {
    let app = app();
    let (status, body) = send_json(&app, get("/health")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert!(body["model_id"].as_str().unwrap().starts_with("stub-linear-v1"));
    let (_, keys) = send_json(&app, get("/corpus")).await;
    let keys: Vec<&str> = keys.as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for name in ["bakery", "cinema", "coffee_mug", "golden_retriever", "soccer_ball"] {
        assert!(keys.contains(&name), "{keys:?}");
    }
}

#[tokio::test]
async fn full_loop_over_http() {
    let app = app();
    let created = create(&app).await;
    let id = created["session_id"].as_str().unwrap().to_string();
    assert_eq!(created["image_url"], format!("/sessions/{id}/image"));
    let baseline_top = created["baseline"]["top"].clone();
    assert_eq!(baseline_top.as_array().unwrap().len(), 5);
    let confidence = baseline_top[0]["confidence"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&confidence));

    let (status, image) = send(&app, get(&format!("/sessions/{id}/image"))).await;
    assert_eq!(status, StatusCode::OK);
    let on_disk = std::fs::read(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets/corpus/golden_retriever.png"),
    )
    .unwrap();
    assert_eq!(image, on_disk);

    let empty = Mask::new(320, 240).unwrap().encode();
    let (status, record) = send_json(
        &app,
        multipart(&format!("/sessions/{id}/classify"), &[("mask", "image/png", &empty)]),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{record}");
    assert_eq!(record["iteration"], 1);
    assert_eq!(record["input"], "mask");
    assert_eq!(record["response"]["top"], baseline_top);

    let painted = Mask::from_fn(320, 240, |x, _| x < 160).unwrap().encode();
    let options = json!({"fill": {"kind": "constant_color", "color": [0, 0, 0]}, "k": 3}).to_string();
    let (status, record) = send_json(
        &app,
        multipart(
            &format!("/sessions/{id}/classify"),
            &[("options", "application/json", options.as_bytes()), ("mask", "image/png", &painted)],
        ),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{record}");
    assert_eq!(record["iteration"], 2);
    assert_eq!(record["coverage"], 0.5);
    assert_eq!(record["fill"], json!({"kind": "constant_color", "color": [0, 0, 0]}));
    assert_eq!(record["response"]["top"].as_array().unwrap().len(), 3);

    let composited = ImageBuffer::filled(320, 240, [124, 116, 104]).unwrap().to_png();
    let (status, record) = send_json(
        &app,
        multipart(
            &format!("/sessions/{id}/classify-composited"),
            &[("image", "image/png", &composited)],
        ),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{record}");
    assert_eq!(record["iteration"], 3);
    assert_eq!(record["input"], "composited");

    let (status, session) = send_json(&app, get(&format!("/sessions/{id}"))).await;
    assert_eq!(status, StatusCode::OK);
    let iterations: Vec<u64> = session["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["iteration"].as_u64().unwrap())
        .collect();
    assert_eq!(iterations, vec![0, 1, 2, 3]);

    let (status, _) = send(
        &app,
        Request::builder()
            .method(Method::DELETE)
            .uri(format!("/sessions/{id}"))
            .body(Body::empty())
            .unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, body) = send_json(&app, get(&format!("/sessions/{id}"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "not_found");
}

#[tokio::test]
async fn error_statuses() {
    let app = app();
    let (status, body) = send_json(
        &app,
        post_json("/sessions", json!({"source": "local_corpus", "selector": "no_such_key"})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "not_found");

    let (status, _) = send(
        &app,
        Request::post("/sessions").body(Body::from("{not json")).unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, body) = send_json(
        &app,
        post_json("/sessions", json!({"source": "remote_api", "selector": "dog"})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND, "{body}");

    let id = create(&app).await["session_id"].as_str().unwrap().to_string();
    let uri = format!("/sessions/{id}/classify");

    let small = Mask::new(100, 100).unwrap().encode();
    let (status, body) = send_json(&app, multipart(&uri, &[("mask", "image/png", &small)])).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "shape");

    let (status, body) =
        send_json(&app, multipart(&uri, &[("mask", "image/png", b"garbage")])).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "parse");

    let (status, body) = send_json(&app, multipart(&uri, &[])).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "bad_request");

    let (status, _) = send_json(
        &app,
        multipart("/sessions/missing/classify", &[("mask", "image/png", &small)]),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
