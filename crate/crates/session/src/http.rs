//! JSON/multipart HTTP surface over [`SessionService`].
//!
//! | Method | Path                                   | Body                                   |
//! |--------|----------------------------------------|----------------------------------------|
//! | GET    | `/health`                              |                                        |
//! | GET    | `/corpus`                              |                                        |
//! | POST   | `/sessions`                            | `{source, selector, k?}`               |
//! | GET    | `/sessions/{id}`                       |                                        |
//! | DELETE | `/sessions/{id}`                       |                                        |
//! | GET    | `/sessions/{id}/image`                 |                                        |
//! | GET    | `/sessions/{id}/masks/{hash}`          |                                        |
//! | POST   | `/sessions/{id}/classify`              | multipart: `mask` (PNG), `options`     |
//! | POST   | `/sessions/{id}/classify-composited`   | multipart: `image`, `options`          |

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use xai_core::{ClassificationResponse, FillPolicy};

use crate::error::{Result, ServiceError};
use crate::service::SessionService;
use crate::types::{InteractionRecord, Session, SourceKind};

const BODY_LIMIT: usize = 32 * 1024 * 1024;

#[derive(Debug, Deserialize)]
pub struct CreateSessionRequest {
    pub source: SourceKind,
    pub selector: String,
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub session_id: String,
    pub image_url: String,
    pub width: u32,
    pub height: u32,
    pub baseline: ClassificationResponse,
}

/// The `options` part of a classify request.
#[derive(Debug, Default, Deserialize)]
pub struct ClassifyOptions {
    #[serde(default)]
    pub fill: FillPolicy,
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub model_id: String,
    pub preprocessing: String,
    pub sessions: usize,
}

pub fn router(service: Arc<SessionService>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/corpus", get(corpus))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/image", get(session_image))
        .route("/sessions/{id}/masks/{hash}", get(session_mask))
        .route("/sessions/{id}/classify", post(classify))
        .route("/sessions/{id}/classify-composited", post(classify_composited))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(CorsLayer::permissive())
        .with_state(service)
}

async fn health(State(svc): State<Arc<SessionService>>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        model_id: svc.pipeline().model().model_id().to_string(),
        preprocessing: svc.pipeline().preprocessing().to_string(),
        sessions: svc.session_ids().len(),
    })
}

async fn corpus(State(svc): State<Arc<SessionService>>) -> Json<Vec<String>> {
    Json(svc.corpus_keys())
}

async fn blocking<T, F>(f: F) -> Result<T>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Inference(format!("worker task failed: {e}")))?
}

async fn create_session(
    State(svc): State<Arc<SessionService>>,
    body: Bytes,
) -> Result<(StatusCode, Json<CreateSessionResponse>)> {
    let req: CreateSessionRequest = serde_json::from_slice(&body)
        .map_err(|e| ServiceError::Parse(format!("request body: {e}")))?;
    let fetched = svc.fetch(req.source, &req.selector).await?;
    let worker = svc.clone();
    let session = blocking(move || worker.create_from_fetched(fetched, req.k)).await?;
    Ok((
        StatusCode::CREATED,
        Json(CreateSessionResponse {
            image_url: format!("/sessions/{}/image", session.session_id),
            width: session.image_ref.width,
            height: session.image_ref.height,
            baseline: session.baseline().response.clone(),
            session_id: session.session_id,
        }),
    ))
}

async fn get_session(
    State(svc): State<Arc<SessionService>>,
    Path(id): Path<String>,
) -> Result<Json<Session>> {
    Ok(Json(svc.get_history(&id)?))
}

async fn delete_session(
    State(svc): State<Arc<SessionService>>,
    Path(id): Path<String>,
) -> Result<StatusCode> {
    svc.delete_session(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

fn sniff_content_type(bytes: &[u8]) -> &'static str {
    match bytes {
        [0x89, b'P', b'N', b'G', ..] => "image/png",
        [0xFF, 0xD8, ..] => "image/jpeg",
        [b'B', b'M', ..] => "image/bmp",
        [b'R', b'I', b'F', b'F', _, _, _, _, b'W', b'E', b'B', b'P', ..] => "image/webp",
        _ => "application/octet-stream",
    }
}

async fn session_image(
    State(svc): State<Arc<SessionService>>,
    Path(id): Path<String>,
) -> Result<Response> {
    let bytes = svc.image_bytes(&id)?;
    let content_type = sniff_content_type(&bytes);
    Ok(([(header::CONTENT_TYPE, content_type)], bytes.as_ref().clone()).into_response())
}

async fn session_mask(
    State(svc): State<Arc<SessionService>>,
    Path((id, hash)): Path<(String, String)>,
) -> Result<Response> {
    let session = svc.get_history(&id)?;
    if !session.records.iter().any(|r| r.mask_hash == hash) {
        return Err(ServiceError::NotFound(format!("mask {hash} in session {id}")));
    }
    let store = svc
        .store()
        .ok_or_else(|| ServiceError::NotFound("masks are only kept with a store".into()))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], store.mask_bytes(&hash)?).into_response())
}

/// Pulls the named binary part and the optional `options` JSON part.
async fn read_parts(mut multipart: Multipart, wanted: &str) -> Result<(Bytes, ClassifyOptions)> {
    let bad = |e: axum::extract::multipart::MultipartError| {
        ServiceError::Parse(format!("multipart body: {e}"))
    };
    let mut payload = None;
    let mut options = ClassifyOptions::default();
    while let Some(field) = multipart.next_field().await.map_err(bad)? {
        match field.name() {
            Some(name) if name == wanted => payload = Some(field.bytes().await.map_err(bad)?),
            Some("options") => {
                let raw = field.bytes().await.map_err(bad)?;
                options = serde_json::from_slice(&raw)
                    .map_err(|e| ServiceError::Parse(format!("options: {e}")))?;
            }
            _ => {}
        }
    }
    let payload =
        payload.ok_or_else(|| ServiceError::BadRequest(format!("missing multipart part {wanted:?}")))?;
    Ok((payload, options))
}

async fn classify(
    State(svc): State<Arc<SessionService>>,
    Path(id): Path<String>,
    multipart: Multipart,
) -> Result<Json<InteractionRecord>> {
    let (mask, options) = read_parts(multipart, "mask").await?;
    let record =
        blocking(move || svc.classify_masked(&id, &mask, options.fill, options.k)).await?;
    Ok(Json(record))
}

async fn classify_composited(
    State(svc): State<Arc<SessionService>>,
    Path(id): Path<String>,
    multipart: Multipart,
) -> Result<Json<InteractionRecord>> {
    let (image, options) = read_parts(multipart, "image").await?;
    let record =
        blocking(move || svc.classify_composited(&id, &image, options.fill, options.k)).await?;
    Ok(Json(record))
}
