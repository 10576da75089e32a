use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use super::{NewRater, RatingService, StoreError, SubmitError};
use crate::eval::{blind_label, CriterionScores, TaskOutput};

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub bind: SocketAddr,
    pub tasks: PathBuf,
    pub ratings: PathBuf,
    pub raters: Option<PathBuf>,
    pub blind: bool,
}

fn error(status: StatusCode, message: impl std::fmt::Display) -> Response {
    (status, Json(json!({ "error": message.to_string() }))).into_response()
}

/// Routes of the rating API over a shared service.
pub fn router(service: Arc<RatingService>) -> Router {
    Router::new()
        .route("/api/tasks", get(list_tasks))
        .route("/api/tasks/{id}", get(task_detail))
        .route("/api/raters", post(register))
        .route("/api/ratings", post(submit))
        .route("/api/progress", get(progress))
        .layer(CorsLayer::permissive())
        .with_state(service)
}

async fn list_tasks(State(s): State<Arc<RatingService>>) -> Response {
    let Some(tasks) = s.tasks() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "no task file loaded");
    };
    let list: Vec<Value> = tasks
        .tasks
        .iter()
        .map(|t| {
            json!({
                "task_id": t.task_id,
                "title": t.title,
                "description": t.description,
                "n_outputs": t.outputs.len(),
            })
        })
        .collect();
    Json(list).into_response()
}

async fn task_detail(State(s): State<Arc<RatingService>>, Path(id): Path<String>) -> Response {
    let Some(tasks) = s.tasks() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "no task file loaded");
    };
    let Some(task) = tasks.tasks.iter().find(|t| t.task_id == id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown task {id:?}"));
    };
    let blind = s.blind || tasks.blinded;
    let mut ordered: Vec<&TaskOutput> = task.outputs.iter().collect();
    let relabel = blind && !tasks.blinded;
    if relabel {
        ordered.sort_by(|a, b| a.output_id.cmp(&b.output_id));
    }
    let outputs: Vec<Value> = ordered
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let mut v = json!({
                "output_id": o.output_id,
                "label": if relabel { blind_label(i) } else { o.label.clone() },
                "dsl_text": o.dsl_text,
                "concept_summary": o.concept_summary,
                "prompt_text": o.prompt_text,
            });
            if let (false, Some(m)) = (blind, &o.model_id) {
                v["model_id"] = json!(m);
            }
            v
        })
        .collect();
    Json(json!({
        "task_id": task.task_id,
        "title": task.title,
        "description": task.description,
        "outputs": outputs,
    }))
    .into_response()
}

#[allow(clippy::result_large_err)]
fn parse_body<T: serde::de::DeserializeOwned>(body: &str) -> Result<T, Response> {
    serde_json::from_str(body).map_err(|e| error(StatusCode::BAD_REQUEST, format!("bad request body: {e}")))
}

fn storage_failure(e: StoreError) -> Response {
    error(StatusCode::INTERNAL_SERVER_ERROR, e)
}

async fn register(State(s): State<Arc<RatingService>>, body: String) -> Response {
    let new: NewRater = match parse_body(&body) {
        Ok(n) => n,
        Err(r) => return r,
    };
    if let Err(m) = new.check() {
        return error(StatusCode::BAD_REQUEST, m);
    }
    let s2 = s.clone();
    match tokio::task::spawn_blocking(move || s2.register(new)).await.expect("register task") {
        Ok(profile) => (StatusCode::CREATED, Json(profile)).into_response(),
        Err(e) => storage_failure(e),
    }
}

/// Scores arrive as arbitrary JSON numbers so out-of-range values get a
/// 400 with the offending criterion rather than a generic decode error.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScores {
    semantic_correctness: Value,
    concept_identification: Value,
    completeness: Value,
    advanced_features: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Submission {
    task_id: String,
    output_id: String,
    rater_id: String,
    scores: RawScores,
    #[serde(default)]
    comment: Option<String>,
}

fn scores(raw: &RawScores) -> Result<CriterionScores, String> {
    let fields = [
        &raw.semantic_correctness,
        &raw.concept_identification,
        &raw.completeness,
        &raw.advanced_features,
    ];
    let mut values = [0i64; 4];
    for ((slot, v), name) in values.iter_mut().zip(fields).zip(CriterionScores::CRITERIA) {
        *slot = v
            .as_i64()
            .ok_or_else(|| format!("{name} must be an integer between 1 and 5"))?;
    }
    CriterionScores::try_new(values).map_err(|e| e.to_string())
}

async fn submit(State(s): State<Arc<RatingService>>, body: String) -> Response {
    let sub: Submission = match parse_body(&body) {
        Ok(v) => v,
        Err(r) => return r,
    };
    let scores = match scores(&sub.scores) {
        Ok(v) => v,
        Err(m) => return error(StatusCode::BAD_REQUEST, m),
    };
    let s2 = s.clone();
    let result = tokio::task::spawn_blocking(move || {
        s2.submit(&sub.task_id, &sub.output_id, &sub.rater_id, scores, sub.comment)
    })
    .await
    .expect("submit task");
    match result {
        Ok(rec) => (StatusCode::CREATED, Json(json!({ "rating_id": rec.rating_id }))).into_response(),
        Err(e) => {
            let status = match &e {
                SubmitError::NoTasks => StatusCode::SERVICE_UNAVAILABLE,
                SubmitError::Score(_) => StatusCode::BAD_REQUEST,
                SubmitError::Duplicate { .. } => StatusCode::CONFLICT,
                SubmitError::UnknownRater(_) | SubmitError::UnknownTask(_) | SubmitError::UnknownOutput { .. } => {
                    StatusCode::UNPROCESSABLE_ENTITY
                }
                SubmitError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
            };
            error(status, e)
        }
    }
}

#[derive(Deserialize)]
struct ProgressQuery {
    rater_id: Option<String>,
}

async fn progress(State(s): State<Arc<RatingService>>, Query(q): Query<ProgressQuery>) -> Response {
    let Some(rater_id) = q.rater_id else {
        return error(StatusCode::BAD_REQUEST, "rater_id query parameter required");
    };
    match s.progress(&rater_id) {
        Some(p) => Json(p).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown rater {rater_id:?}")),
    }
}

/// Runs the service until Ctrl-C.
pub fn serve(cfg: &ServeConfig) -> Result<(), Box<dyn std::error::Error>> {
    let service = Arc::new(RatingService::open(
        Some(&cfg.tasks),
        &cfg.ratings,
        cfg.raters.as_deref(),
        cfg.blind,
    )?);
    if service.tasks().is_none() {
        eprintln!("warning: task file {} not found; /api/tasks will answer 503", cfg.tasks.display());
    }
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(cfg.bind).await?;
        eprintln!("rating service listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(service))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

#[cfg(test)]
mod tests;
