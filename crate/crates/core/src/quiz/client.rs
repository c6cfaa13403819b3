//! Contract for the external language-model service used to build quiz banks
//! and to sit the open-book exam. Everything here is mockable; nothing in the
//! scoring path needs a live endpoint.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::thread;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClientError {
    /// Endpoint unreachable, timed out or answered with a non-success status
    /// after all retries.
    #[error("transport error: {0}")]
    Transport(String),
    /// The endpoint answered but the reply did not have the expected shape.
    #[error("malformed reply: {0}")]
    Parse(String),
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str) -> std::result::Result<String, ClientError>;
}

const TEMPLATES: &[(&str, &str)] = &[
    ("source_extraction", include_str!("../../resources/prompts/source_extraction.txt")),
    ("verification", include_str!("../../resources/prompts/verification.txt")),
    ("quiz_generation", include_str!("../../resources/prompts/quiz_generation.txt")),
    ("slide_extraction", include_str!("../../resources/prompts/slide_extraction.txt")),
    ("quiz_evaluation", include_str!("../../resources/prompts/quiz_evaluation.txt")),
];

/// Bumped whenever a template file changes.
pub const TEMPLATE_VERSION: &str = "1";

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z_]+)\}").expect("valid regex"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: &'static str,
    pub text: &'static str,
}

impl PromptTemplate {
    pub fn builtin(id: &str) -> Result<Self> {
        TEMPLATES
            .iter()
            .find(|(name, _)| *name == id)
            .map(|&(id, text)| PromptTemplate { id, text })
            .ok_or_else(|| {
                let known: Vec<&str> = TEMPLATES.iter().map(|(n, _)| *n).collect();
                Error::InvalidInput(format!(
                    "unknown prompt template {id:?}; known: {}",
                    known.join(", ")
                ))
            })
    }

    pub fn ids() -> impl Iterator<Item = &'static str> {
        TEMPLATES.iter().map(|(n, _)| *n)
    }

    /// Distinct placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for cap in placeholder_re().captures_iter(self.text) {
            let name = cap.get(1).expect("group").as_str();
            if !out.contains(&name) {
                out.push(name);
            }
        }
        out
    }

    /// Fills every placeholder. Substituted text is not rescanned, so values
    /// may themselves contain braces.
    pub fn render(&self, subs: &BTreeMap<String, String>) -> Result<String> {
        let missing: Vec<&str> = self
            .placeholders()
            .into_iter()
            .filter(|p| !subs.contains_key(*p))
            .collect();
        if !missing.is_empty() {
            return Err(Error::InvalidInput(format!(
                "template {} is missing substitutions for: {}",
                self.id,
                missing.join(", ")
            )));
        }
        Ok(placeholder_re()
            .replace_all(self.text, |caps: &regex::Captures| subs[&caps[1]].clone())
            .into_owned())
    }
}

/// Renders a built-in template and sends it through `client`, returning the
/// raw reply text.
pub fn llm_exchange(
    client: &dyn LlmClient,
    template_id: &str,
    subs: &BTreeMap<String, String>,
) -> Result<String> {
    let prompt = PromptTemplate::builtin(template_id)?.render(subs)?;
    Ok(client.complete(&prompt)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClientConfig {
    /// Chat-completions style URL.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub parallel_requests: usize,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "default".into(),
            api_key_env: "DECKEVAL_API_KEY".into(),
            timeout_secs: 120.0,
            max_retries: 3,
            retry_backoff_ms: 500,
            parallel_requests: 4,
        }
    }
}

/// Blocking HTTP client speaking the common chat-completions JSON shape.
pub struct HttpClient {
    config: ClientConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(config: ClientConfig) -> Result<Self> {
        if !(config.timeout_secs > 0.0) {
            return Err(Error::InvalidInput("client.timeout_secs must be > 0".into()));
        }
        let api_key = std::env::var(&config.api_key_env).ok();
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            config,
            api_key,
            agent,
        })
    }

    fn attempt(&self, body: &str) -> std::result::Result<String, (bool, ClientError)> {
        let mut req = self
            .agent
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send(body)
            .map_err(|e| (true, ClientError::Transport(e.to_string())))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| (true, ClientError::Transport(e.to_string())))?;
        if status >= 500 || status == 429 {
            return Err((true, ClientError::Transport(format!("HTTP {status}"))));
        }
        if status >= 400 {
            return Err((false, ClientError::Transport(format!("HTTP {status}: {text}"))));
        }
        extract_content(&text).map_err(|e| (false, e))
    }
}

fn extract_content(body: &str) -> std::result::Result<String, ClientError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| ClientError::Parse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_owned)
        .ok_or_else(|| ClientError::Parse("reply has no choices[0].message.content".into()))
}

impl LlmClient for HttpClient {
    fn complete(&self, prompt: &str) -> std::result::Result<String, ClientError> {
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        })
        .to_string();
        let mut last = ClientError::Transport("no attempt made".into());
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let backoff = self.config.retry_backoff_ms.saturating_mul(1 << (attempt - 1).min(10));
                thread::sleep(Duration::from_millis(backoff));
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err((true, e)) => last = e,
                Err((false, e)) => return Err(e),
            }
        }
        match last {
            ClientError::Transport(msg) => Err(ClientError::Transport(format!(
                "{msg} (after {} attempts)",
                self.config.max_retries + 1
            ))),
            other => Err(other),
        }
    }
}

/// Sends prompts with at most `parallel` requests in flight, keeping order.
pub fn complete_many(
    client: &dyn LlmClient,
    prompts: &[String],
    parallel: usize,
) -> Vec<std::result::Result<String, ClientError>> {
    let parallel = parallel.max(1);
    let mut out = Vec::with_capacity(prompts.len());
    for chunk in prompts.chunks(parallel) {
        let results: Vec<_> = thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|p| s.spawn(move || client.complete(p)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(ClientError::Transport("worker panicked".into()))))
                .collect()
        });
        out.extend(results);
    }
    out
}

/// Test double returning canned replies in order, repeating the last one.
pub struct MockClient {
    replies: Vec<std::result::Result<String, ClientError>>,
    calls: std::sync::Mutex<Vec<String>>,
}

impl MockClient {
    pub fn new(reply: impl Into<String>) -> Self {
        Self::sequence(vec![Ok(reply.into())])
    }

    pub fn failing(err: ClientError) -> Self {
        Self::sequence(vec![Err(err)])
    }

    pub fn sequence(replies: Vec<std::result::Result<String, ClientError>>) -> Self {
        assert!(!replies.is_empty(), "mock needs at least one reply");
        Self {
            replies,
            calls: Default::default(),
        }
    }

    /// Prompts received so far.
    pub fn prompts(&self) -> Vec<String> {
        self.calls.lock().expect("mock lock").clone()
    }
}

impl LlmClient for MockClient {
    fn complete(&self, prompt: &str) -> std::result::Result<String, ClientError> {
        let mut calls = self.calls.lock().expect("mock lock");
        let idx = calls.len().min(self.replies.len() - 1);
        calls.push(prompt.to_owned());
        self.replies[idx].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subs(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn templates_expose_expected_placeholders() {
        let t = PromptTemplate::builtin("quiz_evaluation").unwrap();
        assert_eq!(t.placeholders(), ["topic", "slide_contents", "quiz_questions"]);
        let t = PromptTemplate::builtin("source_extraction").unwrap();
        assert_eq!(t.placeholders(), ["domain", "focus", "one_sentence", "document_text"]);
        assert!(PromptTemplate::builtin("slide_extraction").unwrap().placeholders().is_empty());
        assert!(PromptTemplate::builtin("nope").is_err());
    }

    #[test]
    fn render_fills_and_reports_missing() {
        let t = PromptTemplate::builtin("verification").unwrap();
        let out = t
            .render(&subs(&[("document_text", "DOC {x}"), ("draft_json", "{}")]))
            .unwrap();
        assert!(out.contains("Text: DOC {x}"));
        assert!(out.contains("Draft JSON: {}"));
        let err = t.render(&subs(&[("document_text", "x")])).unwrap_err();
        assert!(err.to_string().contains("draft_json"));
    }

    #[test]
    fn exchange_through_mock() {
        let mock = MockClient::new("reply");
        let out = llm_exchange(
            &mock,
            "verification",
            &subs(&[("document_text", "d"), ("draft_json", "j")]),
        )
        .unwrap();
        assert_eq!(out, "reply");
        assert_eq!(mock.prompts().len(), 1);
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        // Port 9 on loopback is closed in the sandbox; connection is refused.
        let client = HttpClient::new(ClientConfig {
            endpoint: "http://127.0.0.1:9/v1/chat/completions".into(),
            timeout_secs: 2.0,
            max_retries: 2,
            retry_backoff_ms: 1,
            ..Default::default()
        })
        .unwrap();
        match client.complete("hi") {
            Err(ClientError::Transport(msg)) => assert!(msg.contains("3 attempts"), "{msg}"),
            other => panic!("expected transport error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_body_is_parse_error() {
        assert!(matches!(extract_content("not json"), Err(ClientError::Parse(_))));
        assert!(matches!(extract_content(r#"{"choices":[]}"#), Err(ClientError::Parse(_))));
        let ok = r#"{"choices":[{"message":{"content":"hi"}}]}"#;
        assert_eq!(extract_content(ok).unwrap(), "hi");
    }

    #[test]
    fn complete_many_keeps_order() {
        let mock = MockClient::sequence(vec![Ok("a".into()), Ok("b".into()), Ok("c".into())]);
        let prompts: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let out = complete_many(&mock, &prompts, 1);
        let got: Vec<String> = out.into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(got, ["a", "b", "c"]);
    }
}
