use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::Utc;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use super::{NewRater, Progress, RaterProfile};
use crate::eval::{CriterionScores, RatingRecord, ScoreError, TaskFile};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Error)]
pub enum SubmitError {
    #[error("no task file loaded")]
    NoTasks,
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("unknown rater {0:?}")]
    UnknownRater(String),
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("output {output_id:?} is not part of task {task_id:?}")]
    UnknownOutput { task_id: String, output_id: String },
    #[error("rater {rater_id:?} already rated output {output_id:?}")]
    Duplicate { rater_id: String, output_id: String },
    #[error("storage failure: {0}")]
    Storage(#[from] StoreError),
}

/// JSON-lines file opened for append. A torn final line left by a crash is
/// cut off on open; it was never acknowledged.
struct Appender {
    path: PathBuf,
    file: File,
}

impl Appender {
    fn open<T: DeserializeOwned>(path: &Path) -> Result<(Self, Vec<T>), StoreError> {
        let io = |source| StoreError::Io { path: path.to_path_buf(), source };
        let mut bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io(e)),
        };
        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let torn = complete < bytes.len();
        bytes.truncate(complete);
        let mut records = Vec::new();
        for (i, line) in bytes.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|source| StoreError::Corrupt {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })?);
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        if torn {
            file.set_len(complete as u64).map_err(io)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            records,
        ))
    }

    fn append<T: Serialize>(&mut self, record: &T) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(record).expect("records serialize");
        line.push(b'\n');
        self.file
            .write_all(&line)
            .and_then(|_| self.file.sync_data())
            .map_err(|source| StoreError::Io { path: self.path.clone(), source })
    }
}

#[derive(Default)]
struct Index {
    raters: HashMap<String, RaterProfile>,
    rated: HashSet<(String, String)>,
    per_rater: HashMap<String, usize>,
    ratings: Vec<RatingRecord>,
}

impl Index {
    fn add_rating(&mut self, r: RatingRecord) {
        self.rated.insert((r.rater_id.clone(), r.output_id.clone()));
        *self.per_rater.entry(r.rater_id.clone()).or_default() += 1;
        self.ratings.push(r);
    }
}

struct Writers {
    ratings: Appender,
    raters: Appender,
}

/// Shared service state. Writes go through one appender lock; the index
/// is updated only after the record is durable.
pub struct RatingService {
    tasks: Option<Arc<TaskFile>>,
    /// output id -> task id
    outputs: HashMap<String, String>,
    pub blind: bool,
    writers: Mutex<Writers>,
    index: RwLock<Index>,
}

impl RatingService {
    /// `raters_path` defaults to the ratings path with a `.raters.jsonl`
    /// extension. A missing task file leaves the service up but without
    /// tasks.
    pub fn open(
        tasks_path: Option<&Path>,
        ratings_path: &Path,
        raters_path: Option<&Path>,
        blind: bool,
    ) -> Result<Self, StoreError> {
        let tasks = match tasks_path {
            Some(p) if p.exists() => {
                let text = std::fs::read_to_string(p).map_err(|source| StoreError::Io { path: p.to_path_buf(), source })?;
                let file: TaskFile = serde_json::from_str(&text).map_err(|e| StoreError::Invalid {
                    path: p.to_path_buf(),
                    message: e.to_string(),
                })?;
                Some(file)
            }
            _ => None,
        };
        let raters_path = raters_path
            .map(Path::to_path_buf)
            .unwrap_or_else(|| ratings_path.with_extension("raters.jsonl"));
        let (ratings, rating_records) = Appender::open::<RatingRecord>(ratings_path)?;
        let (raters, rater_records) = Appender::open::<RaterProfile>(&raters_path)?;
        Self::build(tasks, blind, Writers { ratings, raters }, rating_records, rater_records)
    }

    fn build(
        tasks: Option<TaskFile>,
        blind: bool,
        writers: Writers,
        ratings: Vec<RatingRecord>,
        raters: Vec<RaterProfile>,
    ) -> Result<Self, StoreError> {
        let mut outputs = HashMap::new();
        if let Some(t) = &tasks {
            for task in &t.tasks {
                for o in &task.outputs {
                    outputs.insert(o.output_id.clone(), task.task_id.clone());
                }
            }
        }
        let mut index = Index::default();
        for r in raters {
            index.raters.insert(r.rater_id.clone(), r);
        }
        for r in ratings {
            index.add_rating(r);
        }
        Ok(Self {
            tasks: tasks.map(Arc::new),
            outputs,
            blind,
            writers: Mutex::new(writers),
            index: RwLock::new(index),
        })
    }

    pub fn tasks(&self) -> Option<&Arc<TaskFile>> {
        self.tasks.as_ref()
    }

    pub fn total_outputs(&self) -> usize {
        self.tasks.as_ref().map_or(0, |t| t.total_outputs())
    }

    pub fn register(&self, new: NewRater) -> Result<RaterProfile, StoreError> {
        let profile = RaterProfile {
            rater_id: uuid::Uuid::new_v4().to_string(),
            age_band: new.age_band,
            gender: new.gender,
            dsl_experience: new.dsl_experience,
            llm_usage_frequency: new.llm_usage_frequency,
        };
        let mut w = self.writers.lock().expect("writers");
        w.raters.append(&profile)?;
        self.index
            .write()
            .expect("index")
            .raters
            .insert(profile.rater_id.clone(), profile.clone());
        Ok(profile)
    }

    pub fn submit(
        &self,
        task_id: &str,
        output_id: &str,
        rater_id: &str,
        scores: CriterionScores,
        comment: Option<String>,
    ) -> Result<RatingRecord, SubmitError> {
        scores.check()?;
        let tasks = self.tasks.as_ref().ok_or(SubmitError::NoTasks)?;
        if !tasks.tasks.iter().any(|t| t.task_id == task_id) {
            return Err(SubmitError::UnknownTask(task_id.into()));
        }
        if self.outputs.get(output_id).map(String::as_str) != Some(task_id) {
            return Err(SubmitError::UnknownOutput {
                task_id: task_id.into(),
                output_id: output_id.into(),
            });
        }
        // Held across the check and the append so duplicates cannot race.
        let mut w = self.writers.lock().expect("writers");
        {
            let idx = self.index.read().expect("index");
            if !idx.raters.contains_key(rater_id) {
                return Err(SubmitError::UnknownRater(rater_id.into()));
            }
            if idx.rated.contains(&(rater_id.to_string(), output_id.to_string())) {
                return Err(SubmitError::Duplicate {
                    rater_id: rater_id.into(),
                    output_id: output_id.into(),
                });
            }
        }
        let record = RatingRecord {
            rating_id: uuid::Uuid::new_v4().to_string(),
            task_id: task_id.into(),
            output_id: output_id.into(),
            rater_id: rater_id.into(),
            scores,
            comment: comment.filter(|c| !c.trim().is_empty()),
            timestamp: Utc::now(),
        };
        w.ratings.append(&record)?;
        self.index.write().expect("index").add_rating(record.clone());
        Ok(record)
    }

    /// `None` for an unknown rater.
    pub fn progress(&self, rater_id: &str) -> Option<Progress> {
        let idx = self.index.read().expect("index");
        idx.raters.get(rater_id)?;
        Some(Progress {
            rated: idx.per_rater.get(rater_id).copied().unwrap_or(0),
            total: self.total_outputs(),
        })
    }

    pub fn ratings(&self) -> Vec<RatingRecord> {
        self.index.read().expect("index").ratings.clone()
    }

    pub fn rater(&self, rater_id: &str) -> Option<RaterProfile> {
        self.index.read().expect("index").raters.get(rater_id).cloned()
    }
}
