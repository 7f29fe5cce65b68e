//! HTTP routes. Handlers parse JSON bodies, hand the work to the
//! [`Workbench`] on the blocking pool and map failures to `{code, message,
//! details}` bodies.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::error::{ApiError, ApiResult};
use crate::service::{FeatureLookup, Workbench};

type App = State<Arc<Workbench>>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

fn reply<T: Serialize>(status: StatusCode, r: ApiResult<T>) -> Response {
    match r {
        Ok(v) => (status, Json(v)).into_response(),
        Err(e) => e.into_response(),
    }
}

/// Study uploads carry whole volumes inline.
const MAX_BODY: usize = 1 << 30;

pub fn router(wb: Arc<Workbench>) -> Router {
    Router::new()
        .route("/studies", post(create_study))
        .route("/studies/{id}", get(get_study))
        .route("/studies/{id}/rois", post(submit_roi))
        .route("/studies/{id}/series/{sid}/slices/{z}", get(get_slice))
        .route("/rois/{id}/features", get(get_features))
        .route("/rois/{id}/link", post(link_rois))
        .route("/rois/{id}/copy", post(copy_roi))
        .route("/tools/region-grow", post(region_grow))
        .route("/graphs/validate", post(validate_graph))
        .route("/graphs/node-types", get(node_types))
        .route("/runs", post(start_run))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/nodes/{nid}/output", get(node_output))
        .route("/experiments", get(history))
        .route("/experiments/{id}", axum::routing::delete(delete_experiment))
        .route("/experiments/{id}/retest", post(retest))
        .fallback(|| async { ApiError::not_found("no-route", "no such endpoint") })
        .layer(DefaultBodyLimit::max(MAX_BODY))
        .with_state(wb)
}

async fn create_study(State(wb): App, body: Bytes) -> Response {
    reply(StatusCode::CREATED, blocking(move || wb.create_study(parse(&body)?)).await)
}

async fn get_study(State(wb): App, Path(id): Path<String>) -> Response {
    reply(StatusCode::OK, blocking(move || wb.study(&id)).await)
}

async fn submit_roi(State(wb): App, Path(id): Path<String>, body: Bytes) -> Response {
    reply(StatusCode::ACCEPTED, blocking(move || wb.submit_roi(&id, parse(&body)?)).await)
}

async fn get_slice(State(wb): App, Path((id, sid, z)): Path<(String, String, usize)>) -> Response {
    reply(StatusCode::OK, blocking(move || wb.slice(&id, &sid, z)).await)
}

/// `?settings=<hash>` selects the extraction settings, `?format=csv`
/// returns the one-row feature table.
async fn get_features(State(wb): App, Path(id): Path<String>, Query(q): Query<HashMap<String, String>>) -> Response {
    let csv = match q.get("format").map(String::as_str) {
        None | Some("json") => false,
        Some("csv") => true,
        Some(other) => return ApiError::bad_request(format!("unknown format `{other}`")).into_response(),
    };
    let settings = q.get("settings").cloned();
    match blocking(move || wb.features(&id, settings.as_deref())).await {
        Ok(FeatureLookup::Ready(v)) if csv => match radiowb_core::radiomics::to_csv(&[v]) {
            Ok(text) => ([(header::CONTENT_TYPE, "text/csv")], text).into_response(),
            Err(e) => ApiError::internal(e).into_response(),
        },
        Ok(FeatureLookup::Ready(v)) => (StatusCode::OK, Json(json!({"state": "done", "features": v}))).into_response(),
        Ok(FeatureLookup::Pending(job)) => {
            (StatusCode::ACCEPTED, Json(json!({"state": job.state, "job": job}))).into_response()
        }
        Err(e) => e.into_response(),
    }
}

async fn link_rois(State(wb): App, Path(id): Path<String>, body: Bytes) -> Response {
    reply(StatusCode::OK, blocking(move || wb.link(&id, parse(&body)?)).await)
}

async fn copy_roi(State(wb): App, Path(id): Path<String>, body: Bytes) -> Response {
    reply(StatusCode::OK, blocking(move || wb.copy(&id, parse(&body)?)).await)
}

async fn region_grow(State(wb): App, body: Bytes) -> Response {
    reply(StatusCode::OK, blocking(move || wb.region_grow(parse(&body)?)).await)
}

async fn validate_graph(State(wb): App, body: Bytes) -> Response {
    let r = parse(&body).map(|spec| wb.validate_graph(&spec));
    reply(StatusCode::OK, r)
}

async fn node_types(State(wb): App) -> Response {
    reply(StatusCode::OK, Ok::<_, ApiError>(wb.node_types()))
}

async fn start_run(State(wb): App, body: Bytes) -> Response {
    reply(StatusCode::ACCEPTED, blocking(move || wb.start_run(parse(&body)?)).await)
}

async fn get_run(State(wb): App, Path(id): Path<String>) -> Response {
    reply(StatusCode::OK, wb.run(&id))
}

async fn node_output(State(wb): App, Path((id, nid)): Path<(String, String)>) -> Response {
    match wb.node_output(&id, &nid) {
        Ok(out) => {
            let status = match out.status {
                radiowb_graph::Status::Pending | radiowb_graph::Status::Running => StatusCode::ACCEPTED,
                _ => StatusCode::OK,
            };
            (status, Json(out)).into_response()
        }
        Err(e) => e.into_response(),
    }
}

async fn history(State(wb): App) -> Response {
    reply(StatusCode::OK, blocking(move || wb.history()).await)
}

async fn delete_experiment(State(wb): App, Path(id): Path<String>) -> Response {
    reply(StatusCode::OK, blocking(move || wb.delete_experiment(&id)).await)
}

async fn retest(State(wb): App, Path(id): Path<String>, body: Bytes) -> Response {
    reply(StatusCode::OK, blocking(move || wb.retest(&id, parse(&body)?)).await)
}
