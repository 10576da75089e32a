//! Chat-completion gateway: an OpenAI-compatible HTTP client, a replay
//! backend for deterministic runs, and DSL extraction from raw replies.

mod extract;
mod openai;
mod replay;

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::Message;

pub use extract::{extract_dsl, is_dsl_line};
pub use openai::{OpenAiCompatible, WireRequest};
pub use replay::{ReplayBackend, ReplayScript, ScriptEntry, ScriptedFailure};

pub const DEFAULT_MAX_TOKENS: u32 = 2048;
pub const DEFAULT_TIMEOUT_S: u64 = 120;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    pub seed: Option<u64>,
}

impl ChatRequest {
    pub fn new(model_id: impl Into<String>, messages: Vec<Message>, temperature: f64) -> Self {
        Self {
            model_id: model_id.into(),
            messages,
            temperature,
            max_tokens: Some(DEFAULT_MAX_TOKENS),
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("no messages".into()));
        }
        if self.max_tokens == Some(0) {
            return Err(GatewayError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub finish_reason: String,
    pub latency_ms: u64,
    pub raw: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorClass {
    Retryable,
    Fatal,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("replay fixture has no model `{0}`")]
    ReplayUnknownModel(String),
    #[error("replay fixture for `{model_id}` exhausted at call {calls}")]
    ReplayExhausted { model_id: String, calls: usize },
}

impl GatewayError {
    pub fn class(&self) -> ErrorClass {
        match self {
            GatewayError::Transport(_) | GatewayError::Timeout | GatewayError::Malformed(_) => {
                ErrorClass::Retryable
            }
            GatewayError::Http { status, .. } if *status >= 500 || *status == 429 => {
                ErrorClass::Retryable
            }
            _ => ErrorClass::Fatal,
        }
    }

    pub fn is_retryable(&self) -> bool {
        self.class() == ErrorClass::Retryable
    }
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for Arc<T> {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        (**self).complete(req)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackendKind {
    OpenaiCompatible,
    Replay,
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default)]
    pub api_key: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default)]
    pub fixture: Option<PathBuf>,
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_S
}

impl fmt::Debug for BackendConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackendConfig")
            .field("kind", &self.kind)
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("timeout_s", &self.timeout_s)
            .field("fixture", &self.fixture)
            .finish()
    }
}

/// Partial config as read from a file; present fields override the environment.
#[derive(Debug, Default, Deserialize)]
struct ConfigFile {
    kind: Option<BackendKind>,
    base_url: Option<String>,
    api_key: Option<String>,
    timeout_s: Option<u64>,
    fixture: Option<PathBuf>,
}

impl BackendConfig {
    pub fn openai_compatible(base_url: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::OpenaiCompatible,
            base_url: Some(base_url.into()),
            api_key: None,
            timeout_s: DEFAULT_TIMEOUT_S,
            fixture: None,
        }
    }

    pub fn replay(fixture: impl Into<PathBuf>) -> Self {
        Self {
            kind: BackendKind::Replay,
            base_url: None,
            api_key: None,
            timeout_s: DEFAULT_TIMEOUT_S,
            fixture: Some(fixture.into()),
        }
    }

    /// Reads `LLM_BASE_URL` and `LLM_API_KEY`.
    pub fn from_env() -> Self {
        Self::from_vars(|k| std::env::var(k).ok())
    }

    fn from_vars(get: impl Fn(&str) -> Option<String>) -> Self {
        Self {
            kind: BackendKind::OpenaiCompatible,
            base_url: get("LLM_BASE_URL").filter(|s| !s.is_empty()),
            api_key: get("LLM_API_KEY").filter(|s| !s.is_empty()),
            timeout_s: DEFAULT_TIMEOUT_S,
            fixture: None,
        }
    }

    /// Environment settings overlaid with the fields present in a JSON file.
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_env().overlay_json(&text)
    }

    fn overlay_json(mut self, text: &str) -> Result<Self, GatewayError> {
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| GatewayError::Config(e.to_string()))?;
        if let Some(k) = file.kind {
            self.kind = k;
        }
        if file.base_url.is_some() {
            self.base_url = file.base_url;
        }
        if file.api_key.is_some() {
            self.api_key = file.api_key;
        }
        if let Some(t) = file.timeout_s {
            self.timeout_s = t;
        }
        if file.fixture.is_some() {
            self.fixture = file.fixture;
        }
        Ok(self)
    }

    pub fn check(&self) -> Result<(), GatewayError> {
        if self.timeout_s == 0 {
            return Err(GatewayError::Config("timeout_s must be positive".into()));
        }
        match self.kind {
            BackendKind::Replay if self.fixture.is_none() => {
                Err(GatewayError::Config("replay backend needs a fixture path".into()))
            }
            BackendKind::OpenaiCompatible if self.base_url.is_none() => Err(GatewayError::Config(
                "no base_url configured (set LLM_BASE_URL or --endpoint)".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Builds the backend a config describes. Replay backends are shared per
/// fixture path so their cursors persist across calls.
pub fn backend_for(cfg: &BackendConfig) -> Result<Arc<dyn ChatBackend>, GatewayError> {
    cfg.check()?;
    match cfg.kind {
        BackendKind::OpenaiCompatible => Ok(Arc::new(OpenAiCompatible::new(cfg)?)),
        BackendKind::Replay => {
            static SHARED: OnceLock<Mutex<HashMap<PathBuf, Arc<ReplayBackend>>>> = OnceLock::new();
            let path = cfg.fixture.clone().expect("checked");
            let key = std::fs::canonicalize(&path).unwrap_or(path.clone());
            let mut shared = SHARED.get_or_init(Default::default).lock().expect("replay cache");
            if let Some(b) = shared.get(&key) {
                return Ok(b.clone());
            }
            let b = Arc::new(ReplayBackend::load(&path)?);
            shared.insert(key, b.clone());
            Ok(b)
        }
    }
}

/// One-shot completion against the backend described by `cfg`.
pub fn complete(cfg: &BackendConfig, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
    backend_for(cfg)?.complete(req)
}
