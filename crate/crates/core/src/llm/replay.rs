//! Scripted backend that replays canned responses per model.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChatBackend, ChatRequest, ChatResponse, GatewayError};

/// A failure a fixture can inject in place of a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedFailure {
    Timeout,
    Transport,
    Auth,
    ServerError,
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptEntry {
    Response(String),
    Failure { error: ScriptedFailure },
}

impl From<&str> for ScriptEntry {
    fn from(s: &str) -> Self {
        ScriptEntry::Response(s.to_string())
    }
}

/// Fixture file shape: model id to ordered responses.
pub type ReplayScript = HashMap<String, Vec<ScriptEntry>>;

#[derive(Debug)]
pub struct ReplayBackend {
    script: ReplayScript,
    cursors: Mutex<HashMap<String, usize>>,
}

impl ReplayBackend {
    pub fn new(script: ReplayScript) -> Self {
        Self {
            script,
            cursors: Mutex::new(HashMap::new()),
        }
    }

    /// Convenience for tests: plain text responses for one model.
    pub fn single(model_id: &str, responses: &[&str]) -> Self {
        let mut script = ReplayScript::new();
        script.insert(
            model_id.to_string(),
            responses.iter().map(|r| ScriptEntry::from(*r)).collect(),
        );
        Self::new(script)
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("cannot read replay fixture {}: {e}", path.display())))?;
        let script: ReplayScript = serde_json::from_str(&text)
            .map_err(|e| GatewayError::Config(format!("bad replay fixture {}: {e}", path.display())))?;
        Ok(Self::new(script))
    }

    /// How many responses have been consumed for `model_id`.
    pub fn calls(&self, model_id: &str) -> usize {
        self.cursors
            .lock()
            .expect("cursor lock")
            .get(model_id)
            .copied()
            .unwrap_or(0)
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        req.validate()?;
        let entries = self
            .script
            .get(&req.model_id)
            .ok_or_else(|| GatewayError::ReplayUnknownModel(req.model_id.clone()))?;
        let index = {
            let mut cursors = self.cursors.lock().expect("cursor lock");
            let cursor = cursors.entry(req.model_id.clone()).or_insert(0);
            let i = *cursor;
            *cursor += 1;
            i
        };
        let entry = entries.get(index).ok_or_else(|| GatewayError::ReplayExhausted {
            model_id: req.model_id.clone(),
            calls: index + 1,
        })?;
        match entry {
            ScriptEntry::Response(content) => Ok(ChatResponse {
                content: content.clone(),
                finish_reason: "stop".into(),
                latency_ms: 0,
                raw: serde_json::json!({ "replay": { "model": req.model_id, "index": index } }),
            }),
            ScriptEntry::Failure { error } => Err(match error {
                ScriptedFailure::Timeout => GatewayError::Timeout,
                ScriptedFailure::Transport => GatewayError::Transport("scripted transport failure".into()),
                ScriptedFailure::Auth => GatewayError::Auth { status: 401 },
                ScriptedFailure::ServerError => GatewayError::Http {
                    status: 500,
                    body: "scripted server error".into(),
                },
                ScriptedFailure::Malformed => GatewayError::Malformed("scripted malformed body".into()),
            }),
        }
    }
}
