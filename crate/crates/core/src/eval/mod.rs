//! Batch evaluation: registry, scenario matrix, rating aggregation and
//! export of rating tasks.

mod aggregate;
mod matrix;
mod registry;
mod tasks;

use std::path::PathBuf;

use thiserror::Error;

pub use aggregate::{
    aggregate, export_results, filter_max_params, import_results, load_ratings, sort_rows, AggregateRow,
    CriterionScores, ExportFormat, OutputIndex, RatingRecord, ScoreError, SortMode,
};
pub use matrix::{run_matrix, summarize, MatrixReport, PairFailure, ValiditySummary};
pub use registry::{
    bundled_registry, bundled_scenarios, load_registry, load_scenarios, parse_registry, parse_scenarios, registry_max_params,
    ModelEntry, Scenario,
};
pub use tasks::{
    blind_label, build_rating_tasks, default_key_path, export_rating_tasks, BlindingKey, KeyEntry, RatingTask, TaskFile, TaskOutput,
};

/// Inclusive parameter bound of the small-model view.
pub const SMALL_MODEL_MAX_PARAMS: f64 = 8.0;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{what}: {message}")]
    Format { what: String, message: String },
    #[error("duplicate model_id {0:?} in registry")]
    DuplicateModel(String),
    #[error("model {model_id:?} has non-positive params_billions {params}")]
    NonPositiveParams { model_id: String, params: f64 },
    #[error("duplicate scenario_id {0:?}")]
    DuplicateScenario(String),
    #[error("scenario {0:?} has empty user_input")]
    EmptyScenario(String),
    #[error("rating {rating_id} references unknown output {output_id:?}")]
    UnknownOutput { rating_id: String, output_id: String },
    #[error("output {output_id:?} resolves to model {model_id:?}, which is not in the registry")]
    UnknownModel { output_id: String, model_id: String },
    #[error("rating {rating_id}: {source}")]
    Score {
        rating_id: String,
        #[source]
        source: ScoreError,
    },
    #[error("nothing to export")]
    Empty,
    #[error(transparent)]
    Log(#[from] crate::pipeline::LogError),
}

impl EvalError {
    fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        EvalError::Io { path: path.to_path_buf(), source }
    }

    fn format(what: impl std::fmt::Display, message: impl std::fmt::Display) -> Self {
        EvalError::Format {
            what: what.to_string(),
            message: message.to_string(),
        }
    }
}
