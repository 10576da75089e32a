//! Client for `POST {base_url}/chat/completions`.

use std::time::{Duration, Instant};

use serde::Serialize;

use super::{BackendConfig, ChatBackend, ChatRequest, ChatResponse, GatewayError};
use crate::prompt::Message;

/// Request body sent on the wire.
#[derive(Debug, Serialize)]
pub struct WireRequest<'a> {
    pub model: &'a str,
    pub messages: &'a [Message],
    pub temperature: f64,
    pub stream: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl<'a> WireRequest<'a> {
    pub fn from_request(req: &'a ChatRequest) -> Self {
        Self {
            model: &req.model_id,
            messages: &req.messages,
            temperature: req.temperature,
            stream: false,
            max_tokens: req.max_tokens,
            seed: req.seed,
        }
    }
}

pub struct OpenAiCompatible {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl OpenAiCompatible {
    pub fn new(cfg: &BackendConfig) -> Result<Self, GatewayError> {
        let base = cfg
            .base_url
            .as_deref()
            .ok_or_else(|| GatewayError::Config("missing base_url".into()))?;
        reqwest::Url::parse(base)
            .map_err(|e| GatewayError::Config(format!("invalid base_url `{base}`: {e}")))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_s))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self {
            endpoint: format!("{}/chat/completions", base.trim_end_matches('/')),
            api_key: cfg.api_key.clone(),
            client,
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

fn classify(e: reqwest::Error) -> GatewayError {
    if e.is_timeout() {
        GatewayError::Timeout
    } else if e.is_decode() {
        GatewayError::Malformed(e.to_string())
    } else {
        GatewayError::Transport(e.to_string())
    }
}

impl ChatBackend for OpenAiCompatible {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        req.validate()?;
        let body = serde_json::to_vec(&WireRequest::from_request(req))
            .map_err(|e| GatewayError::InvalidRequest(e.to_string()))?;
        let mut call = self
            .client
            .post(&self.endpoint)
            .header("content-type", "application/json")
            .body(body);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let started = Instant::now();
        let resp = call.send().map_err(classify)?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(classify)?;
        let latency_ms = started.elapsed().as_millis() as u64;

        match status {
            200..=299 => {}
            401 | 403 => return Err(GatewayError::Auth { status }),
            _ => {
                let mut body = text;
                body.truncate(512);
                return Err(GatewayError::Http { status, body });
            }
        }

        let raw: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| GatewayError::Malformed(e.to_string()))?;
        let choice = raw
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| GatewayError::Malformed("no choices[0]".into()))?;
        let content = choice
            .pointer("/message/content")
            .and_then(|c| c.as_str())
            .ok_or_else(|| GatewayError::Malformed("no choices[0].message.content".into()))?
            .to_string();
        let finish_reason = choice
            .get("finish_reason")
            .and_then(|f| f.as_str())
            .unwrap_or_default()
            .to_string();
        Ok(ChatResponse {
            content,
            finish_reason,
            latency_ms,
            raw,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::Role;

    #[test]
    fn body_carries_exact_temperature() {
        let req = ChatRequest::new(
            "gemma3:12b",
            vec![Message { role: Role::System, content: "s".into() }],
            0.1,
        );
        let body = serde_json::to_string(&WireRequest::from_request(&req)).unwrap();
        assert!(body.contains(r#""temperature":0.1"#), "{body}");
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["temperature"].as_f64(), Some(0.1));
        assert_eq!(v["stream"], false);
        assert_eq!(v["model"], "gemma3:12b");
        assert_eq!(v["messages"][0]["role"], "system");
        assert_eq!(v["max_tokens"], 2048);
        assert!(v.get("seed").is_none());
    }

    #[test]
    fn endpoint_join() {
        let c = OpenAiCompatible::new(&BackendConfig::openai_compatible("http://localhost:11434/v1/")).unwrap();
        assert_eq!(c.endpoint(), "http://localhost:11434/v1/chat/completions");
        assert!(OpenAiCompatible::new(&BackendConfig::openai_compatible("not a url")).is_err());
    }
}
