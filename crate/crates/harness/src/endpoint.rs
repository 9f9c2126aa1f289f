//! Chat-completions endpoint player.
//!
//! The whole conversation is resent on every turn. Transport failures
//! (connection errors, timeouts, HTTP 429 and 5xx) are retried with
//! exponential backoff; whatever text the model returns is passed through
//! untouched.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;
use turnbench_core::protocol::{ChatMessage, Player, PlayerError};

/// Default environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "TURNBENCH_API_KEY";

#[derive(Debug, Error)]
pub enum EndpointError {
    #[error("reading endpoint config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing endpoint config {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("endpoint config needs a non-empty {0}")]
    Missing(&'static str),
}

/// Connection settings. The key itself is never part of the config; only
/// the name of the environment variable that holds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// First backoff delay; doubles on each retry.
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
}

fn default_timeout() -> u64 {
    120
}

fn default_retries() -> u32 {
    3
}

fn default_backoff() -> u64 {
    500
}

fn default_key_env() -> String {
    API_KEY_ENV.to_string()
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            temperature: None,
            top_p: None,
            max_tokens: None,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            retry_backoff_ms: default_backoff(),
            api_key_env: default_key_env(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, EndpointError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| EndpointError::Io { path: shown.clone(), source })?;
        let config: Self = serde_json::from_str(&text).map_err(|source| EndpointError::Parse { path: shown, source })?;
        if config.base_url.trim().is_empty() {
            return Err(EndpointError::Missing("base_url"));
        }
        if config.model.trim().is_empty() {
            return Err(EndpointError::Missing("model"));
        }
        Ok(config)
    }

    /// Full URL of the completions route.
    pub fn completions_url(&self) -> String {
        let base = self.base_url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }

    /// Request body for `messages`.
    pub fn body(&self, messages: &[ChatMessage]) -> Value {
        let mut body = json!({ "model": self.model, "messages": messages });
        if let Some(t) = self.temperature {
            body["temperature"] = json!(t);
        }
        if let Some(p) = self.top_p {
            body["top_p"] = json!(p);
        }
        if let Some(m) = self.max_tokens {
            body["max_tokens"] = json!(m);
        }
        body
    }
}

/// Bearer token. Deliberately neither `Serialize` nor printable.
#[derive(Clone)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        ApiKey(key.into())
    }

    /// Reads `var`, treating an unset or blank variable as no key.
    pub fn from_env(var: &str) -> Option<Self> {
        std::env::var(var).ok().filter(|k| !k.trim().is_empty()).map(ApiKey)
    }

    fn header(&self) -> String {
        format!("Bearer {}", self.0)
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

enum Attempt {
    Done(String),
    Retry(PlayerError),
    Fatal(PlayerError),
}

pub struct RemotePlayer {
    config: EndpointConfig,
    key: Option<ApiKey>,
    agent: ureq::Agent,
}

impl RemotePlayer {
    pub fn new(config: EndpointConfig, key: Option<ApiKey>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, key, agent }
    }

    /// Builds a player whose key comes from the config's environment variable.
    pub fn from_env(config: EndpointConfig) -> Self {
        let key = ApiKey::from_env(&config.api_key_env);
        Self::new(config, key)
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let mut request = self.agent.post(&self.config.completions_url()).header("Content-Type", "application/json");
        if let Some(key) = &self.key {
            request = request.header("Authorization", key.header());
        }
        let mut response = match request.send(body.to_string()) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(t)) => return Attempt::Retry(PlayerError::Timeout(format!("request timed out ({t})"))),
            Err(
                e @ (ureq::Error::Io(_)
                | ureq::Error::ConnectionFailed
                | ureq::Error::HostNotFound
                | ureq::Error::Protocol(_)
                | ureq::Error::BodyStalled),
            ) => return Attempt::Retry(PlayerError::Failed(format!("transport: {e}"))),
            Err(e) => return Attempt::Fatal(PlayerError::Failed(format!("request: {e}"))),
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(t)) => return Attempt::Retry(PlayerError::Timeout(format!("reading response timed out ({t})"))),
            Err(e) => return Attempt::Retry(PlayerError::Failed(format!("reading response: {e}"))),
        };
        if status == 429 || status >= 500 {
            return Attempt::Retry(PlayerError::Failed(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Attempt::Fatal(PlayerError::Failed(format!("HTTP {status}: {}", snippet(&text))));
        }
        match extract_content(&text) {
            Some(content) => Attempt::Done(content),
            None => Attempt::Fatal(PlayerError::Failed(format!("response has no choices[0].message: {}", snippet(&text)))),
        }
    }
}

fn snippet(text: &str) -> String {
    text.chars().take(200).collect()
}

/// First choice's message content. A `null` content is an empty reply.
fn extract_content(text: &str) -> Option<String> {
    let value: Value = serde_json::from_str(text).ok()?;
    let message = value.get("choices")?.get(0)?.get("message")?;
    match message.get("content") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Null) | None => Some(String::new()),
        Some(other) => Some(other.to_string()),
    }
}

impl Player for RemotePlayer {
    fn reply(&mut self, conversation: &[ChatMessage]) -> Result<String, PlayerError> {
        let body = self.config.body(conversation);
        let mut delay = Duration::from_millis(self.config.retry_backoff_ms);
        let mut tries = 0;
        loop {
            match self.attempt(&body) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(e) if tries >= self.config.max_retries => return Err(e),
                Attempt::Retry(_) => {
                    tries += 1;
                    thread::sleep(delay);
                    delay = delay.saturating_mul(2);
                }
            }
        }
    }

    fn describe(&self) -> BTreeMap<String, Value> {
        let c = &self.config;
        let mut out = BTreeMap::from([
            ("kind".to_string(), json!("remote")),
            ("model".to_string(), json!(c.model)),
            ("base_url".to_string(), json!(c.base_url)),
            ("timeout_secs".to_string(), json!(c.timeout_secs)),
            ("max_retries".to_string(), json!(c.max_retries)),
        ]);
        for (name, value) in [("temperature", c.temperature.map(|v| json!(v))), ("top_p", c.top_p.map(|v| json!(v))), ("max_tokens", c.max_tokens.map(|v| json!(v)))] {
            if let Some(v) = value {
                out.insert(name.to_string(), v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_joining() {
        assert_eq!(EndpointConfig::new("http://h/v1/", "m").completions_url(), "http://h/v1/chat/completions");
        assert_eq!(EndpointConfig::new("http://h/v1/chat/completions", "m").completions_url(), "http://h/v1/chat/completions");
    }

    #[test]
    fn body_fields() {
        let mut c = EndpointConfig::new("http://h", "m");
        c.temperature = Some(0.5);
        let body = c.body(&[ChatMessage::user("hi")]);
        assert_eq!(body, json!({"model": "m", "messages": [{"role": "user", "content": "hi"}], "temperature": 0.5}));
    }

    #[test]
    fn content_extraction() {
        assert_eq!(extract_content(r#"{"choices":[{"message":{"content":"x"}}]}"#).as_deref(), Some("x"));
        assert_eq!(extract_content(r#"{"choices":[{"message":{"content":null}}]}"#).as_deref(), Some(""));
        assert_eq!(extract_content(r#"{"error":"bad"}"#), None);
    }

    #[test]
    fn key_is_redacted_and_absent_from_description() {
        let key = ApiKey::new("sk-secret-value");
        assert!(!format!("{key:?}").contains("secret"));
        let player = RemotePlayer::new(EndpointConfig::new("http://h", "m"), Some(key));
        let described = serde_json::to_string(&player.describe()).unwrap();
        assert!(!described.contains("secret"));
        let config = serde_json::to_string(player.config()).unwrap();
        assert!(!config.contains("secret"));
    }

    #[test]
    fn config_rejects_inline_keys() {
        let err = serde_json::from_str::<EndpointConfig>(r#"{"base_url":"http://h","model":"m","api_key":"sk"}"#);
        assert!(err.is_err());
    }
}
