//! Two-stage generation with a bounded regenerate-on-failure loop.

mod log;
mod review;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{parse, print, Diagnostic, DiagnosticCode, DslModel, SourceSpan};
use crate::llm::{backend_for, extract_dsl, BackendConfig, ChatBackend, ChatRequest, GatewayError};
use crate::prompt::{PromptError, PromptSpec, PromptTemplate, RenderedPrompt};
use crate::validate::{export_symbols, validate, ExternalSymbols};

pub use log::{
    load_runs, persist_run, read_records, runs_from_records, AttemptRecord, LogError, LogRecord, ReviewRecord, RunLog,
};
pub use review::{ReviewDecision, ReviewGate, ScriptedReview, StdinReview};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub max_attempts: u32,
    pub initial_temperature: f64,
    pub retry_temperature: f64,
    pub review_gate: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_temperature: 0.8,
            retry_temperature: 0.1,
            review_gate: false,
        }
    }
}

impl PipelineConfig {
    pub fn check(&self) -> Result<(), PipelineError> {
        if self.max_attempts == 0 {
            return Err(PipelineError::Config("max_attempts must be at least 1".into()));
        }
        for (name, t) in [
            ("initial_temperature", self.initial_temperature),
            ("retry_temperature", self.retry_temperature),
        ] {
            if !(0.0..=2.0).contains(&t) {
                return Err(PipelineError::Config(format!("{name} {t} outside [0, 2]")));
            }
        }
        if self.retry_temperature > self.initial_temperature {
            return Err(PipelineError::Config(
                "retry_temperature must not exceed initial_temperature".into(),
            ));
        }
        Ok(())
    }

    pub fn temperature_for(&self, attempt_no: u32) -> f64 {
        if attempt_no <= 1 {
            self.initial_temperature
        } else {
            self.retry_temperature
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage {
    DataModel,
    UiModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Valid,
    SyntacticallyInvalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationAttempt {
    pub attempt_no: u32,
    pub temperature: f64,
    pub prompt_hash: String,
    /// Flattened prompt sent for this attempt.
    pub prompt_text: String,
    pub raw_output: String,
    pub extracted_dsl: String,
    pub parse_ok: bool,
    pub semantic_ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub latency_ms: u64,
    pub timestamp: DateTime<Utc>,
    /// Set when the backend failed with a retryable error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport_error: Option<String>,
}

impl GenerationAttempt {
    pub fn succeeded(&self) -> bool {
        self.parse_ok && self.semantic_ok
    }

    /// Text the next prompt shows as the prior output.
    fn feedback_source(&self) -> &str {
        if self.extracted_dsl.is_empty() {
            &self.raw_output
        } else {
            &self.extracted_dsl
        }
    }
}

/// Fields repeated on every log line of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunEnvelope {
    pub run_id: String,
    pub scenario_id: String,
    pub model_id: String,
    pub stage: Stage,
    pub max_attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewState {
    pub approved: bool,
    pub reviewed_dsl: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRun {
    pub run_id: String,
    pub scenario_id: String,
    pub model_id: String,
    pub stage: Stage,
    pub max_attempts: u32,
    pub attempts: Vec<GenerationAttempt>,
    /// `None` while the run is still in progress.
    pub outcome: Option<Outcome>,
    pub review: Option<ReviewState>,
    #[serde(skip)]
    pub final_model: Option<DslModel>,
}

impl GenerationRun {
    fn from_envelope(env: RunEnvelope) -> Self {
        Self {
            run_id: env.run_id,
            scenario_id: env.scenario_id,
            model_id: env.model_id,
            stage: env.stage,
            max_attempts: env.max_attempts,
            attempts: Vec::new(),
            outcome: None,
            review: None,
            final_model: None,
        }
    }

    pub fn envelope(&self) -> RunEnvelope {
        RunEnvelope {
            run_id: self.run_id.clone(),
            scenario_id: self.scenario_id.clone(),
            model_id: self.model_id.clone(),
            stage: self.stage,
            max_attempts: self.max_attempts,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.outcome == Some(Outcome::Valid)
    }

    /// DSL text of the accepted model, after any review edit.
    pub fn final_dsl(&self) -> Option<&str> {
        if !self.is_valid() {
            return None;
        }
        if let Some(ReviewState { reviewed_dsl: Some(text), .. }) = &self.review {
            return Some(text);
        }
        self.attempts.last().map(|a| a.extracted_dsl.as_str())
    }

    /// Prompt of the first attempt.
    pub fn prompt_text(&self) -> Option<&str> {
        self.attempts.first().map(|a| a.prompt_text.as_str())
    }

    /// Derives `outcome` and `final_model` from the attempts.
    fn settle(&mut self) {
        self.outcome = match self.attempts.last() {
            Some(a) if a.succeeded() => Some(Outcome::Valid),
            _ if self.attempts.len() as u32 >= self.max_attempts => Some(Outcome::SyntacticallyInvalid),
            _ => None,
        };
        self.final_model = self.final_dsl().and_then(|t| parse(t).ok());
    }

    pub fn to_records(&self) -> Vec<LogRecord> {
        let env = self.envelope();
        let mut out: Vec<LogRecord> = self
            .attempts
            .iter()
            .map(|a| {
                LogRecord::Attempt(AttemptRecord {
                    envelope: env.clone(),
                    attempt: a.clone(),
                })
            })
            .collect();
        if let Some(r) = &self.review {
            out.push(LogRecord::Review(ReviewRecord {
                envelope: env,
                approved: r.approved,
                reviewed_dsl: r.reviewed_dsl.clone(),
            }));
        }
        out
    }

    /// Equality ignoring spans inside `final_model`.
    pub fn structurally_eq(&self, other: &Self) -> bool {
        let models_eq = match (&self.final_model, &other.final_model) {
            (Some(a), Some(b)) => a.structurally_eq(b),
            (None, None) => true,
            _ => false,
        };
        models_eq
            && self.run_id == other.run_id
            && self.scenario_id == other.scenario_id
            && self.model_id == other.model_id
            && self.stage == other.stage
            && self.max_attempts == other.max_attempts
            && self.attempts == other.attempts
            && self.outcome == other.outcome
            && self.review == other.review
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error("prompt: {0}")]
    Prompt(#[from] PromptError),
    #[error("fatal backend error for {model_id} after {attempts_completed} attempt(s): {source}")]
    Fatal {
        model_id: String,
        attempts_completed: usize,
        #[source]
        source: GatewayError,
    },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("review edit is not a valid model: {}", .0.iter().map(|d| d.one_line()).collect::<Vec<_>>().join("; "))]
    InvalidEdit(Vec<Diagnostic>),
    #[error("review gate enabled but no reviewer configured")]
    NoReviewer,
}

/// Verdict on one extracted output.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub parse_ok: bool,
    pub semantic_ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub model: Option<DslModel>,
}

pub trait OutputChecker: Send + Sync {
    fn check(&self, dsl: &str) -> CheckResult;
}

/// Parses and validates data-model DSL, optionally against symbols of an
/// earlier stage.
#[derive(Debug, Clone, Default)]
pub struct DslChecker {
    pub external: Option<ExternalSymbols>,
}

impl OutputChecker for DslChecker {
    fn check(&self, dsl: &str) -> CheckResult {
        match parse(dsl) {
            Err(diagnostics) => CheckResult {
                parse_ok: false,
                semantic_ok: false,
                diagnostics,
                model: None,
            },
            Ok(model) => {
                let report = validate(&model, self.external.as_ref());
                CheckResult {
                    parse_ok: true,
                    semantic_ok: report.valid,
                    diagnostics: report.diagnostics,
                    model: Some(model),
                }
            }
        }
    }
}

/// Hook for a second generation stage that consumes the stage-1 model.
pub trait UiStage: Send + Sync {
    fn prompt_spec(&self, user_input: &str, data_model_dsl: &str) -> PromptSpec;
    fn checker(&self, exported: ExternalSymbols) -> Box<dyn OutputChecker>;
}

#[derive(Debug)]
pub struct TwoStageResult {
    pub data_run: GenerationRun,
    pub ui_run: Option<GenerationRun>,
}

impl TwoStageResult {
    pub fn is_valid(&self) -> bool {
        self.data_run.is_valid() && self.ui_run.as_ref().is_none_or(|r| r.is_valid())
    }
}

/// Everything a run needs besides its inputs.
pub struct Pipeline<'a> {
    pub cfg: PipelineConfig,
    pub backend: &'a dyn ChatBackend,
    pub template: PromptTemplate,
    pub log: Option<&'a RunLog>,
    pub reviewer: Option<&'a dyn ReviewGate>,
    pub ui_stage: Option<&'a dyn UiStage>,
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: PipelineConfig, backend: &'a dyn ChatBackend) -> Self {
        Self {
            cfg,
            backend,
            template: PromptTemplate::default(),
            log: None,
            reviewer: None,
            ui_stage: None,
        }
    }

    pub fn with_log(mut self, log: &'a RunLog) -> Self {
        self.log = Some(log);
        self
    }

    pub fn with_reviewer(mut self, reviewer: &'a dyn ReviewGate) -> Self {
        self.reviewer = Some(reviewer);
        self
    }

    pub fn with_ui_stage(mut self, ui: &'a dyn UiStage) -> Self {
        self.ui_stage = Some(ui);
        self
    }

    pub fn with_template(mut self, template: PromptTemplate) -> Self {
        self.template = template;
        self
    }

    /// Runs the verification loop for one (scenario, model) pair.
    pub fn run_generation(
        &self,
        scenario_id: &str,
        stage: Stage,
        spec: &PromptSpec,
        model_id: &str,
        checker: &dyn OutputChecker,
    ) -> Result<GenerationRun, PipelineError> {
        self.cfg.check()?;
        let mut run = GenerationRun::from_envelope(RunEnvelope {
            run_id: uuid::Uuid::new_v4().to_string(),
            scenario_id: scenario_id.to_string(),
            model_id: model_id.to_string(),
            stage,
            max_attempts: self.cfg.max_attempts,
        });
        let envelope = run.envelope();
        let mut prompt = self.template.build_generation_prompt(spec)?;
        for attempt_no in 1..=self.cfg.max_attempts {
            let attempt = self.attempt(attempt_no, &prompt, model_id, checker, run.attempts.len())?;
            if let Some(log) = self.log {
                log.append_attempt(&envelope, &attempt)?;
            }
            let done = attempt.succeeded();
            if !done && attempt_no < self.cfg.max_attempts {
                prompt = self
                    .template
                    .build_retry_prompt(spec, attempt.feedback_source(), &attempt.diagnostics)?;
            }
            run.attempts.push(attempt);
            if done {
                break;
            }
        }
        run.settle();
        Ok(run)
    }

    fn attempt(
        &self,
        attempt_no: u32,
        prompt: &RenderedPrompt,
        model_id: &str,
        checker: &dyn OutputChecker,
        completed: usize,
    ) -> Result<GenerationAttempt, PipelineError> {
        let temperature = self.cfg.temperature_for(attempt_no);
        let req = ChatRequest::new(model_id, prompt.messages.clone(), temperature);
        let timestamp = Utc::now();
        let mut attempt = GenerationAttempt {
            attempt_no,
            temperature,
            prompt_hash: prompt.template_hash.clone(),
            prompt_text: prompt.flatten(),
            raw_output: String::new(),
            extracted_dsl: String::new(),
            parse_ok: false,
            semantic_ok: false,
            diagnostics: Vec::new(),
            latency_ms: 0,
            timestamp,
            transport_error: None,
        };
        match self.backend.complete(&req) {
            Ok(resp) => {
                attempt.latency_ms = resp.latency_ms;
                attempt.extracted_dsl = extract_dsl(&resp.content);
                attempt.raw_output = resp.content;
                let verdict = checker.check(&attempt.extracted_dsl);
                attempt.parse_ok = verdict.parse_ok;
                attempt.semantic_ok = verdict.semantic_ok;
                attempt.diagnostics = verdict.diagnostics;
            }
            Err(e) if e.is_retryable() => {
                attempt.latency_ms = (Utc::now() - timestamp).num_milliseconds().max(0) as u64;
                attempt.diagnostics = vec![Diagnostic::error(
                    DiagnosticCode::E900,
                    SourceSpan::start_of_input(),
                    format!("no output received: {e}"),
                )];
                attempt.transport_error = Some(e.to_string());
            }
            Err(source) => {
                return Err(PipelineError::Fatal {
                    model_id: model_id.to_string(),
                    attempts_completed: completed,
                    source,
                })
            }
        }
        Ok(attempt)
    }

    /// Stage 1 (data model), the optional review gate, then the optional
    /// UI stage checked against the stage-1 symbols.
    pub fn run_two_stage(
        &self,
        scenario_id: &str,
        user_input: &str,
        model_id: &str,
    ) -> Result<TwoStageResult, PipelineError> {
        let reviewer = match (self.cfg.review_gate, self.reviewer) {
            (true, None) => return Err(PipelineError::NoReviewer),
            (true, Some(r)) => Some(r),
            (false, _) => None,
        };
        let spec = PromptSpec::new(user_input);
        let mut data_run = self.run_generation(scenario_id, Stage::DataModel, &spec, model_id, &DslChecker::default())?;
        if !data_run.is_valid() {
            return Ok(TwoStageResult { data_run, ui_run: None });
        }
        if let Some(reviewer) = reviewer {
            let model = data_run.final_model.as_ref().expect("valid run has a model");
            let state = match reviewer.review(&print(model)) {
                ReviewDecision::Approve => ReviewState {
                    approved: true,
                    reviewed_dsl: None,
                },
                ReviewDecision::Reject => ReviewState {
                    approved: false,
                    reviewed_dsl: None,
                },
                ReviewDecision::Edit(text) => {
                    let verdict = DslChecker::default().check(&text);
                    if !(verdict.parse_ok && verdict.semantic_ok) {
                        return Err(PipelineError::InvalidEdit(verdict.diagnostics));
                    }
                    ReviewState {
                        approved: true,
                        reviewed_dsl: Some(text),
                    }
                }
            };
            if let Some(log) = self.log {
                log.append(&LogRecord::Review(ReviewRecord {
                    envelope: data_run.envelope(),
                    approved: state.approved,
                    reviewed_dsl: state.reviewed_dsl.clone(),
                }))?;
            }
            let approved = state.approved;
            data_run.review = Some(state);
            data_run.settle();
            if !approved {
                return Ok(TwoStageResult { data_run, ui_run: None });
            }
        }
        let ui_run = match self.ui_stage {
            None => None,
            Some(ui) => {
                let model = data_run.final_model.as_ref().expect("valid run has a model");
                let dsl = data_run.final_dsl().expect("valid run has text");
                let checker = ui.checker(export_symbols(model));
                let spec = ui.prompt_spec(user_input, dsl);
                Some(self.run_generation(scenario_id, Stage::UiModel, &spec, model_id, checker.as_ref())?)
            }
        };
        Ok(TwoStageResult { data_run, ui_run })
    }
}

/// Runs one data-model generation against the backend `backend` describes.
pub fn run_generation(
    cfg: &PipelineConfig,
    spec: &PromptSpec,
    model_id: &str,
    backend: &BackendConfig,
) -> Result<GenerationRun, PipelineError> {
    let backend = backend_for(backend).map_err(|source| PipelineError::Fatal {
        model_id: model_id.to_string(),
        attempts_completed: 0,
        source,
    })?;
    Pipeline::new(cfg.clone(), backend.as_ref()).run_generation(
        "adhoc",
        Stage::DataModel,
        spec,
        model_id,
        &DslChecker::default(),
    )
}

/// Two-stage run against the backend `backend` describes.
pub fn run_two_stage(
    cfg: &PipelineConfig,
    user_input: &str,
    model_id: &str,
    backend: &BackendConfig,
    reviewer: Option<&dyn ReviewGate>,
) -> Result<TwoStageResult, PipelineError> {
    let backend = backend_for(backend).map_err(|source| PipelineError::Fatal {
        model_id: model_id.to_string(),
        attempts_completed: 0,
        source,
    })?;
    let mut p = Pipeline::new(cfg.clone(), backend.as_ref());
    p.reviewer = reviewer;
    p.run_two_stage("adhoc", user_input, model_id)
}
