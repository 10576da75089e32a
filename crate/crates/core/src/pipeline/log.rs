//! Append-only JSON-lines run log.
//!
//! Each line is one attempt (or one review decision) carrying the run
//! envelope, so a log truncated after any line still replays to the state
//! the run had reached.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GenerationAttempt, GenerationRun, RunEnvelope};

#[derive(Debug, Error)]
pub enum LogError {
    #[error("run log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("run log {path}, line {line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    #[serde(flatten)]
    pub envelope: RunEnvelope,
    #[serde(flatten)]
    pub attempt: GenerationAttempt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewRecord {
    #[serde(flatten)]
    pub envelope: RunEnvelope,
    pub approved: bool,
    pub reviewed_dsl: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Attempt(AttemptRecord),
    Review(ReviewRecord),
}

impl LogRecord {
    fn envelope(&self) -> &RunEnvelope {
        match self {
            LogRecord::Attempt(a) => &a.envelope,
            LogRecord::Review(r) => &r.envelope,
        }
    }
}

/// Serialized appender. Each record is written with a single `write_all`
/// on a file opened in append mode.
#[derive(Debug)]
pub struct RunLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl RunLog {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, LogError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|source| LogError::Io { path: path.clone(), source })?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &LogRecord) -> Result<(), LogError> {
        let mut line = serde_json::to_vec(record).expect("records serialize");
        line.push(b'\n');
        let mut file = self.file.lock().expect("log lock");
        file.write_all(&line)
            .and_then(|_| file.flush())
            .map_err(|source| LogError::Io { path: self.path.clone(), source })
    }

    pub fn append_attempt(&self, envelope: &RunEnvelope, attempt: &GenerationAttempt) -> Result<(), LogError> {
        self.append(&LogRecord::Attempt(AttemptRecord {
            envelope: envelope.clone(),
            attempt: attempt.clone(),
        }))
    }

    /// Appends every record of a finished run.
    pub fn persist_run(&self, run: &GenerationRun) -> Result<(), LogError> {
        for record in run.to_records() {
            self.append(&record)?;
        }
        Ok(())
    }
}

/// Persists `run` to the log at `path`.
pub fn persist_run(run: &GenerationRun, path: impl AsRef<Path>) -> Result<(), LogError> {
    RunLog::open(path)?.persist_run(run)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<LogRecord>, LogError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| LogError::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| LogError::Io { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| LogError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Rebuilds runs from a log, in order of first appearance.
pub fn load_runs(path: impl AsRef<Path>) -> Result<Vec<GenerationRun>, LogError> {
    Ok(runs_from_records(read_records(path)?))
}

pub fn runs_from_records(records: Vec<LogRecord>) -> Vec<GenerationRun> {
    let mut runs: Vec<GenerationRun> = Vec::new();
    for record in records {
        let env = record.envelope().clone();
        let idx = match runs.iter().position(|r| r.run_id == env.run_id) {
            Some(i) => i,
            None => {
                runs.push(GenerationRun::from_envelope(env));
                runs.len() - 1
            }
        };
        let run = &mut runs[idx];
        match record {
            LogRecord::Attempt(a) => run.attempts.push(a.attempt),
            LogRecord::Review(r) => {
                run.review = Some(super::ReviewState {
                    approved: r.approved,
                    reviewed_dsl: r.reviewed_dsl,
                });
            }
        }
    }
    for run in &mut runs {
        run.settle();
    }
    runs
}
