//! The regenerate-on-failure loop against a scripted backend: two broken
//! answers, then a valid one. Attempts are appended to a run log, which is
//! read back afterwards.
//!
//! Pass `--live MODEL` to use the endpoint in `LLM_BASE_URL` instead.
//!
//! ```sh
//! cargo run --example retry_loop
//! ```

use dslgen::llm::{backend_for, BackendConfig, ChatBackend, ReplayBackend};
use dslgen::pipeline::{load_runs, DslChecker, Pipeline, PipelineConfig, RunLog, Stage};
use dslgen::prompt::PromptSpec;

const SCRIPT: [&str; 3] = [
    // Missing terminator.
    "```\nmain concept Parlor {\n    one name : string\n}\n```",
    // Parses, but the reference target does not exist.
    "Sure! Here is the model:\n```\nmain concept Parlor {\n    one name : string isId;\n    flavors <>--> Flavour;\n}\n\nconcept Flavor {\n    one name : string isId;\n}\n```",
    "```\nmain concept Parlor {\n    one name : string isId;\n    flavors <>--> Flavor;\n}\n\nconcept Flavor {\n    one name : string isId;\n    one price : float;\n}\n```",
];

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let (model_id, backend): (String, Box<dyn ChatBackend>) = match args.iter().position(|a| a == "--live") {
        Some(i) => {
            let model = args.get(i + 1).cloned().expect("--live MODEL");
            let b = backend_for(&BackendConfig::from_env()).expect("LLM_BASE_URL must be set");
            (model, Box::new(b))
        }
        None => ("scripted".into(), Box::new(ReplayBackend::single("scripted", &SCRIPT))),
    };

    let dir = tempfile_dir();
    let log_path = dir.join("runs.jsonl");
    let log = RunLog::open(&log_path).unwrap();
    let spec = PromptSpec::new("An online ice cream parlor selling flavors by the scoop.");
    let run = Pipeline::new(PipelineConfig::default(), backend.as_ref())
        .with_log(&log)
        .run_generation("ice-cream-parlor", Stage::DataModel, &spec, &model_id, &DslChecker::default())
        .expect("no fatal backend error");

    for a in &run.attempts {
        println!("attempt {} at temperature {}: parse_ok={} semantic_ok={}", a.attempt_no, a.temperature, a.parse_ok, a.semantic_ok);
        for d in &a.diagnostics {
            println!("    {}", d.one_line());
        }
    }
    println!("outcome: {:?}", run.outcome);

    let replayed = load_runs(&log_path).unwrap();
    assert!(replayed[0].structurally_eq(&run));
    println!("run log {} replays to the same run", log_path.display());
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("dslgen-retry-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
