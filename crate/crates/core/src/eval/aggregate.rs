use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BlindingKey, EvalError, ModelEntry};
use crate::pipeline::{GenerationRun, Stage};

pub const LIKERT_MIN: u8 = 1;
pub const LIKERT_MAX: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CriterionScores {
    pub semantic_correctness: u8,
    pub concept_identification: u8,
    pub completeness: u8,
    pub advanced_features: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{criterion} score {value} outside {LIKERT_MIN}..={LIKERT_MAX}")]
pub struct ScoreError {
    pub criterion: &'static str,
    pub value: i64,
}

impl CriterionScores {
    pub const CRITERIA: [&'static str; 4] = [
        "semantic_correctness",
        "concept_identification",
        "completeness",
        "advanced_features",
    ];

    /// Builds scores from unchecked integers, rejecting any outside 1..=5.
    pub fn try_new(values: [i64; 4]) -> Result<Self, ScoreError> {
        for (criterion, value) in Self::CRITERIA.into_iter().zip(values) {
            if !(LIKERT_MIN as i64..=LIKERT_MAX as i64).contains(&value) {
                return Err(ScoreError { criterion, value });
            }
        }
        Ok(Self {
            semantic_correctness: values[0] as u8,
            concept_identification: values[1] as u8,
            completeness: values[2] as u8,
            advanced_features: values[3] as u8,
        })
    }

    pub fn values(&self) -> [u8; 4] {
        [
            self.semantic_correctness,
            self.concept_identification,
            self.completeness,
            self.advanced_features,
        ]
    }

    pub fn check(&self) -> Result<(), ScoreError> {
        Self::try_new(self.values().map(i64::from)).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub rating_id: String,
    pub task_id: String,
    pub output_id: String,
    pub rater_id: String,
    pub scores: CriterionScores,
    #[serde(default)]
    pub comment: Option<String>,
    pub timestamp: DateTime<Utc>,
}

/// Reads a ratings JSON-lines file.
pub fn load_ratings(path: impl AsRef<Path>) -> Result<Vec<RatingRecord>, EvalError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| EvalError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EvalError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| EvalError::format(format!("{}, line {}", path.display(), i + 1), e))?;
        out.push(rec);
    }
    Ok(out)
}

/// Maps rated outputs back to the models that produced them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputIndex {
    pub output_to_model: HashMap<String, String>,
    /// Models with at least one VALID data-model run.
    pub valid_models: HashSet<String>,
}

impl OutputIndex {
    /// Output ids are run ids.
    pub fn from_runs(runs: &[GenerationRun]) -> Self {
        let mut idx = Self::default();
        for r in runs.iter().filter(|r| r.stage == Stage::DataModel && r.is_valid()) {
            idx.output_to_model.insert(r.run_id.clone(), r.model_id.clone());
            idx.valid_models.insert(r.model_id.clone());
        }
        idx
    }

    pub fn from_key(key: &BlindingKey) -> Self {
        let mut idx = Self::default();
        for (output_id, e) in &key.outputs {
            idx.output_to_model.insert(output_id.clone(), e.model_id.clone());
            idx.valid_models.insert(e.model_id.clone());
        }
        idx
    }

    pub fn insert(&mut self, output_id: impl Into<String>, model_id: impl Into<String>) {
        let model_id = model_id.into();
        self.valid_models.insert(model_id.clone());
        self.output_to_model.insert(output_id.into(), model_id);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub model_id: String,
    pub params_billions: f64,
    pub sem_correctness: f64,
    pub concept_id: f64,
    pub completeness: f64,
    pub adv_features: f64,
    /// Sum of the four means, so at most 20.
    pub total: f64,
    pub n_ratings: usize,
    pub syntactic_valid: bool,
}

impl AggregateRow {
    pub fn means(&self) -> [f64; 4] {
        [self.sem_correctness, self.concept_id, self.completeness, self.adv_features]
    }
}

/// Per-model mean of each criterion across all ratings; rows follow
/// registry order and cover only rated models.
pub fn aggregate(
    ratings: &[RatingRecord],
    registry: &[ModelEntry],
    index: &OutputIndex,
) -> Result<Vec<AggregateRow>, EvalError> {
    let known: HashMap<&str, &ModelEntry> = registry.iter().map(|e| (e.model_id.as_str(), e)).collect();
    let mut sums: HashMap<&str, ([u64; 4], usize)> = HashMap::new();
    for r in ratings {
        r.scores.check().map_err(|source| EvalError::Score {
            rating_id: r.rating_id.clone(),
            source,
        })?;
        let model_id = index.output_to_model.get(&r.output_id).ok_or_else(|| EvalError::UnknownOutput {
            rating_id: r.rating_id.clone(),
            output_id: r.output_id.clone(),
        })?;
        if !known.contains_key(model_id.as_str()) {
            return Err(EvalError::UnknownModel {
                output_id: r.output_id.clone(),
                model_id: model_id.clone(),
            });
        }
        let slot = sums.entry(model_id.as_str()).or_default();
        for (acc, v) in slot.0.iter_mut().zip(r.scores.values()) {
            *acc += u64::from(v);
        }
        slot.1 += 1;
    }
    Ok(registry
        .iter()
        .filter_map(|e| {
            let (s, n) = sums.get(e.model_id.as_str())?;
            let m = s.map(|x| x as f64 / *n as f64);
            Some(AggregateRow {
                model_id: e.model_id.clone(),
                params_billions: e.params_billions,
                sem_correctness: m[0],
                concept_id: m[1],
                completeness: m[2],
                adv_features: m[3],
                total: m.iter().sum(),
                n_ratings: *n,
                syntactic_valid: index.valid_models.contains(&e.model_id),
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortMode {
    /// Highest total first.
    Total,
    /// Largest model first.
    Size,
}

pub fn sort_rows(rows: &mut [AggregateRow], mode: SortMode) {
    rows.sort_by(|a, b| {
        let key = match mode {
            SortMode::Total => b.total.total_cmp(&a.total),
            SortMode::Size => b.params_billions.total_cmp(&a.params_billions),
        };
        key.then_with(|| a.model_id.cmp(&b.model_id))
    });
}

/// Rows with `params_billions <= max` (inclusive).
pub fn filter_max_params(rows: &[AggregateRow], max: f64) -> Vec<AggregateRow> {
    rows.iter().filter(|r| r.params_billions <= max).cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    /// Picks the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ExportFormat::Json,
            _ => ExportFormat::Csv,
        }
    }
}

pub fn export_results(rows: &[AggregateRow], format: ExportFormat, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    if rows.is_empty() {
        return Err(EvalError::Empty);
    }
    let bytes = match format {
        ExportFormat::Json => {
            let mut v = serde_json::to_vec_pretty(rows).expect("rows serialize");
            v.push(b'\n');
            v
        }
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| EvalError::format(path.display(), e))?;
            }
            w.into_inner().map_err(|e| EvalError::format(path.display(), e))?
        }
    };
    std::fs::write(path, bytes).map_err(|e| EvalError::io(path, e))
}

pub fn import_results(path: impl AsRef<Path>, format: ExportFormat) -> Result<Vec<AggregateRow>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    match format {
        ExportFormat::Json => serde_json::from_str(&text).map_err(|e| EvalError::format(path.display(), e)),
        ExportFormat::Csv => csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| EvalError::format(path.display(), e)),
    }
}
