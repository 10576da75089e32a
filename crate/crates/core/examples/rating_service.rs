//! Start the rating service on an ephemeral port, register a rater, submit
//! a rating and read progress back over HTTP.
//!
//! ```sh
//! cargo run --example rating_service
//! ```

use std::sync::Arc;

use dslgen::dsl::{concept_summary, parse, print};
use dslgen::eval::{RatingTask, TaskFile, TaskOutput};
use dslgen::rating::{router, RatingService};
use serde_json::{json, Value};

fn main() {
    let dir = std::env::temp_dir().join(format!("dslgen-rating-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = parse("main concept Parlor {\n    one name : string isId;\n}\n").unwrap();
    let tasks = TaskFile {
        blinded: true,
        tasks: vec![RatingTask {
            task_id: "ice-cream-parlor".into(),
            title: "Ice cream parlor".into(),
            description: "An online ice cream parlor.".into(),
            outputs: vec![TaskOutput {
                output_id: "out-1".into(),
                label: "Model A".into(),
                model_id: None,
                dsl_text: print(&model),
                concept_summary: concept_summary(&model),
                prompt_text: "the prompt shown behind the help icon".into(),
            }],
        }],
    };
    let tasks_path = dir.join("tasks.json");
    std::fs::write(&tasks_path, serde_json::to_vec_pretty(&tasks).unwrap()).unwrap();
    let service = Arc::new(RatingService::open(Some(&tasks_path), &dir.join("ratings.jsonl"), None, true).unwrap());

    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    rt.spawn(async move { axum::serve(listener, router(service)).await.unwrap() });
    println!("serving on {base}");

    let client = reqwest::blocking::Client::new();
    let get = |path: &str| -> (u16, Value) {
        let r = client.get(format!("{base}{path}")).send().unwrap();
        (r.status().as_u16(), r.json().unwrap())
    };
    let post = |path: &str, body: Value| -> (u16, Value) {
        let r = client.post(format!("{base}{path}")).json(&body).send().unwrap();
        (r.status().as_u16(), r.json().unwrap())
    };

    println!("GET /api/tasks -> {:?}", get("/api/tasks"));
    let (_, detail) = get("/api/tasks/ice-cream-parlor");
    println!("first output label: {}", detail["outputs"][0]["label"]);

    let (status, rater) = post(
        "/api/raters",
        json!({"age_band": "35-44", "gender": "male", "dsl_experience": "ADVANCED", "llm_usage_frequency": "DAILY"}),
    );
    let rater_id = rater["rater_id"].as_str().unwrap().to_string();
    println!("POST /api/raters -> {status}");

    let rating = |s: i64| {
        json!({
            "task_id": "ice-cream-parlor", "output_id": "out-1", "rater_id": rater_id,
            "scores": {"semantic_correctness": 5, "concept_identification": 4, "completeness": s, "advanced_features": 5},
            "comment": "clear structure"
        })
    };
    println!("POST /api/ratings (completeness 6) -> {}", post("/api/ratings", rating(6)).0);
    println!("POST /api/ratings (5,4,3,5) -> {}", post("/api/ratings", rating(3)).0);
    println!("POST /api/ratings again -> {}", post("/api/ratings", rating(3)).0);
    println!("GET /api/progress -> {}", get(&format!("/api/progress?rater_id={rater_id}")).1);
}
