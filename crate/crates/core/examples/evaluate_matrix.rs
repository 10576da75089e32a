//! Batch evaluation over the bundled 39-model registry with a scripted
//! backend, followed by rating-task export, aggregation of sample ratings
//! and CSV export.
//!
//! ```sh
//! cargo run --example evaluate_matrix
//! ```

use dslgen::eval::{
    aggregate, build_rating_tasks, bundled_registry, export_results, filter_max_params, registry_max_params,
    run_matrix, sort_rows, CriterionScores, ExportFormat, OutputIndex, RatingRecord, Scenario, SortMode,
    SMALL_MODEL_MAX_PARAMS,
};
use dslgen::llm::{ReplayBackend, ReplayScript, ScriptEntry};
use dslgen::pipeline::PipelineConfig;

const GOOD: &str = "```\nmain concept Parlor {\n    one name : string isId;\n    flavors <>--> Flavor;\n}\n\nconcept Flavor {\n    one name : string isId;\n    one price : float;\n}\n```";
const BAD: &str = "main concept Parlor { flavors <>--> ; }";

fn main() {
    let registry = bundled_registry();
    let scenarios = vec![Scenario {
        scenario_id: "ice-cream-parlor".into(),
        user_input: "An online ice cream parlor.".into(),
        example_pair: None,
    }];

    // Every third model never gets it right.
    let mut script = ReplayScript::new();
    for (i, m) in registry.iter().enumerate() {
        let answers = if i % 3 == 2 { vec![BAD; 3] } else { vec![BAD, GOOD] };
        script.insert(m.model_id.clone(), answers.into_iter().map(ScriptEntry::from).collect());
    }
    let backend = ReplayBackend::new(script);

    let report = run_matrix(&registry, &scenarios, &PipelineConfig::default(), &backend, None, 8);
    println!(
        "{} of {} models produced a valid output ({} failed outright)",
        report.summary.models_with_valid,
        report.summary.total_models,
        report.failures.len()
    );
    println!(
        "{} registry entries have at most {SMALL_MODEL_MAX_PARAMS}B parameters",
        registry_max_params(&registry, SMALL_MODEL_MAX_PARAMS).len()
    );

    let (tasks, key) = build_rating_tasks(&report.runs, &scenarios, true);
    println!("rating task {:?}: {} blinded outputs", tasks.tasks[0].task_id, tasks.tasks[0].outputs.len());

    // Two raters score every output; scores depend on the model size.
    let mut ratings = Vec::new();
    for (n, out) in tasks.tasks[0].outputs.iter().enumerate() {
        let model = &key.outputs[&out.output_id].model_id;
        let size = registry.iter().find(|e| &e.model_id == model).unwrap().params_billions;
        let base = (1 + (size / 4.0) as i64).min(5);
        for (r, delta) in [("rater-1", 0), ("rater-2", -1)] {
            let s = (base + delta).clamp(1, 5);
            ratings.push(RatingRecord {
                rating_id: format!("{n}-{r}"),
                task_id: tasks.tasks[0].task_id.clone(),
                output_id: out.output_id.clone(),
                rater_id: r.into(),
                scores: CriterionScores::try_new([s, s, (s + 1).min(5), s]).unwrap(),
                comment: None,
                timestamp: chrono::Utc::now(),
            });
        }
    }

    let mut rows = aggregate(&ratings, &registry, &OutputIndex::from_runs(&report.runs)).unwrap();
    sort_rows(&mut rows, SortMode::Total);
    println!("\ntop five by total:");
    for r in rows.iter().take(5) {
        println!("  {:<24} {:>6.2}B  total {:.2}", r.model_id, r.params_billions, r.total);
    }
    let mut small = filter_max_params(&rows, SMALL_MODEL_MAX_PARAMS);
    sort_rows(&mut small, SortMode::Size);
    println!("{} rated models at or below {SMALL_MODEL_MAX_PARAMS}B", small.len());

    let out = std::env::temp_dir().join("dslgen-results.csv");
    export_results(&rows, ExportFormat::Csv, &out).unwrap();
    println!("wrote {}", out.display());
}
