use axum::body::Body;
use axum::http::{Method, Request};
use http_body_util::BodyExt;
use tower::ServiceExt;

use super::*;
use crate::eval::{RatingTask, TaskFile, TaskOutput};
use crate::dsl::{concept_summary, parse, print};

fn task_file(blinded: bool) -> TaskFile {
    let model = parse("main concept Shop { one name : string; }").unwrap();
    let output = |id: &str, model_id: &str| TaskOutput {
        output_id: id.into(),
        label: if blinded { format!("Model {}", id.to_uppercase()) } else { model_id.into() },
        model_id: (!blinded).then(|| model_id.to_string()),
        dsl_text: print(&model),
        concept_summary: concept_summary(&model),
        prompt_text: "prompt".into(),
    };
    TaskFile {
        blinded,
        tasks: vec![
            RatingTask {
                task_id: "t1".into(),
                title: "T1".into(),
                description: "d".into(),
                outputs: vec![output("a", "llama2:latest"), output("b", "phi4:latest")],
            },
            RatingTask {
                task_id: "t2".into(),
                title: "T2".into(),
                description: "d".into(),
                outputs: vec![output("c", "phi4:latest")],
            },
        ],
    }
}

struct Fixture {
    dir: tempfile::TempDir,
    blind: bool,
}

impl Fixture {
    fn new(tasks: Option<&TaskFile>, blind: bool) -> Self {
        let dir = tempfile::tempdir().unwrap();
        if let Some(t) = tasks {
            std::fs::write(dir.path().join("tasks.json"), serde_json::to_vec(t).unwrap()).unwrap();
        }
        Self { dir, blind }
    }

    fn service(&self) -> Arc<RatingService> {
        Arc::new(
            RatingService::open(
                Some(&self.dir.path().join("tasks.json")),
                &self.dir.path().join("ratings.jsonl"),
                None,
                self.blind,
            )
            .unwrap(),
        )
    }
}

async fn call(s: &Arc<RatingService>, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = router(s.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

fn rater_body() -> Value {
    json!({"age_band": "25-34", "gender": "female", "dsl_experience": "BASIC", "llm_usage_frequency": "WEEKLY"})
}

fn rating_body(rater: &str, output: &str, s: [i64; 4]) -> Value {
    json!({
        "task_id": "t1", "output_id": output, "rater_id": rater,
        "scores": {"semantic_correctness": s[0], "concept_identification": s[1], "completeness": s[2], "advanced_features": s[3]},
        "comment": "ok"
    })
}

async fn register(s: &Arc<RatingService>) -> String {
    let (st, v) = call(s, Method::POST, "/api/raters", Some(rater_body())).await;
    assert_eq!(st, StatusCode::CREATED);
    v["rater_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn task_listing() {
    let f = Fixture::new(Some(&task_file(false)), true);
    let s = f.service();
    let (st, v) = call(&s, Method::GET, "/api/tasks", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert!(v[0].get("outputs").is_none());

    let empty = Fixture::new(Some(&TaskFile::default()), true);
    let (st, v) = call(&empty.service(), Method::GET, "/api/tasks", None).await;
    assert_eq!((st, v), (StatusCode::OK, json!([])));

    let missing = Fixture::new(None, true);
    let (st, _) = call(&missing.service(), Method::GET, "/api/tasks", None).await;
    assert_eq!(st, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn task_detail_blinding() {
    let f = Fixture::new(Some(&task_file(false)), true);
    let s = f.service();
    let (st, v) = call(&s, Method::GET, "/api/tasks/t1", None).await;
    assert_eq!(st, StatusCode::OK);
    let text = v.to_string();
    assert!(!text.contains("llama2") && !text.contains("phi4"));
    assert_eq!(v["outputs"][0]["label"], "Model A");
    assert!(!v["outputs"][0]["dsl_text"].as_str().unwrap().is_empty());
    assert_eq!(v["outputs"][0]["prompt_text"], "prompt");

    let open = Fixture::new(Some(&task_file(false)), false);
    let (_, v) = call(&open.service(), Method::GET, "/api/tasks/t1", None).await;
    assert_eq!(v["outputs"][0]["model_id"], "llama2:latest");

    let (st, _) = call(&s, Method::GET, "/api/tasks/nope", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn rater_registration_validates() {
    let f = Fixture::new(Some(&task_file(true)), true);
    let s = f.service();
    register(&s).await;
    let mut bad = rater_body();
    bad["dsl_experience"] = json!("EXPERT");
    assert_eq!(call(&s, Method::POST, "/api/raters", Some(bad)).await.0, StatusCode::BAD_REQUEST);
    let mut bad = rater_body();
    bad["age_band"] = json!("12");
    assert_eq!(call(&s, Method::POST, "/api/raters", Some(bad)).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn rating_contract() {
    let f = Fixture::new(Some(&task_file(true)), true);
    let s = f.service();
    let rater = register(&s).await;
    let (st, v) = call(&s, Method::GET, &format!("/api/progress?rater_id={rater}"), None).await;
    assert_eq!((st, v), (StatusCode::OK, json!({"rated": 0, "total": 3})));

    let (st, v) = call(&s, Method::POST, "/api/ratings", Some(rating_body(&rater, "a", [5, 4, 3, 5]))).await;
    assert_eq!(st, StatusCode::CREATED);
    assert!(v["rating_id"].is_string());

    let (st, _) = call(&s, Method::POST, "/api/ratings", Some(rating_body(&rater, "a", [1, 1, 1, 1]))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (st, _) = call(&s, Method::POST, "/api/ratings", Some(rating_body(&rater, "b", [5, 6, 3, 5]))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let mut frac = rating_body(&rater, "b", [5, 5, 3, 5]);
    frac["scores"]["completeness"] = json!(3.5);
    assert_eq!(call(&s, Method::POST, "/api/ratings", Some(frac)).await.0, StatusCode::BAD_REQUEST);
    let (st, _) = call(&s, Method::POST, "/api/ratings", Some(rating_body(&rater, "c", [5, 5, 5, 5]))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let (st, _) = call(&s, Method::POST, "/api/ratings", Some(rating_body("ghost", "b", [5, 5, 5, 5]))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let (st, _) = call(&s, Method::POST, "/api/ratings", Some(json!({"nope": 1}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);

    let (_, v) = call(&s, Method::GET, &format!("/api/progress?rater_id={rater}"), None).await;
    assert_eq!(v, json!({"rated": 1, "total": 3}));
    let (st, _) = call(&s, Method::GET, "/api/progress?rater_id=ghost", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn restart_reconstructs_acknowledged_ratings() {
    let f = Fixture::new(Some(&task_file(true)), true);
    let s = f.service();
    let rater = register(&s).await;
    for o in ["a", "b"] {
        let (st, _) = call(&s, Method::POST, "/api/ratings", Some(rating_body(&rater, o, [4, 4, 4, 4]))).await;
        assert_eq!(st, StatusCode::CREATED);
    }
    let before = s.ratings();
    drop(s);
    // A torn, unacknowledged write at the tail is discarded.
    let path = f.dir.path().join("ratings.jsonl");
    std::fs::OpenOptions::new()
        .append(true)
        .open(&path)
        .and_then(|mut fh| std::io::Write::write_all(&mut fh, b"{\"rating_id\":\"x"))
        .unwrap();
    let s = f.service();
    assert_eq!(s.ratings(), before);
    let (_, v) = call(&s, Method::GET, &format!("/api/progress?rater_id={rater}"), None).await;
    assert_eq!(v["rated"], 2);
    let (st, _) = call(&s, Method::POST, "/api/ratings", Some(rating_body(&rater, "a", [4, 4, 4, 4]))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(crate::eval::load_ratings(&path).unwrap(), before);
}

#[tokio::test]
async fn cors_headers_present() {
    let f = Fixture::new(Some(&task_file(true)), true);
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/api/tasks")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "GET")
        .body(Body::empty())
        .unwrap();
    let resp = router(f.service()).oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
