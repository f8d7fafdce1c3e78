//! Generation backends.
//!
//! `EchoGenerator` reproduces the retrieved context verbatim — the
//! worst-case leaking generator, useful as an adversarial upper bound.
//! `ExtractiveGenerator` answers with the context sentence sharing the
//! most tokens with the query. Both are deterministic. `RemoteGenerator`
//! delegates to a chat-model endpoint through the [`ModelEndpoint`]
//! abstraction the gateway implements.

use serde_json::Value;
use thiserror::Error;

use crate::tokenize::{sentences, tokenize};
use crate::types::GeneratedAnswer;

/// Answer substituted by the pipeline when a backend fails.
pub const REFUSAL_TEXT: &str = "I cannot answer this request.";

/// Fallback answer when the extractive backend has no context to quote.
pub const NO_CONTEXT_TEXT: &str = "NO CONTEXT";

/// The three prompt components handed to a backend.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptParts {
    pub system: String,
    pub query: String,
    pub context: Vec<String>,
}

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("generation backend failure: {0}")]
    Backend(String),
}

/// Outbound model roles the gateway can serve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Sentinel,
    Strategist,
    Generator,
    Judge,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Sentinel => "sentinel",
            Role::Strategist => "strategist",
            Role::Generator => "generator",
            Role::Judge => "judge",
        }
    }
}

#[derive(Debug, Error)]
pub enum EndpointError {
    #[error("endpoint transport: {0}")]
    Transport(String),
    #[error("endpoint timeout after {0} ms")]
    Timeout(u64),
    #[error("endpoint reply failed schema parse: {0}")]
    Schema(String),
    #[error("no endpoint configured for role {0}")]
    NotConfigured(&'static str),
}

/// Client for a chat-completion-style model endpoint. Implementations
/// return typed failures; callers degrade rather than panic.
pub trait ModelEndpoint: Send + Sync {
    fn call(&self, role: Role, payload: &Value) -> Result<Value, EndpointError>;
}

/// Generation backend contract; must be shareable across concurrent query
/// pipelines.
pub trait Generator: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate(&self, parts: &PromptParts) -> Result<String, GenerationError>;
}

/// Returns the concatenated context texts verbatim.
#[derive(Debug, Default, Clone)]
pub struct EchoGenerator;

impl Generator for EchoGenerator {
    fn name(&self) -> &'static str {
        "echo"
    }

    fn generate(&self, parts: &PromptParts) -> Result<String, GenerationError> {
        Ok(parts.context.join("\n"))
    }
}

/// Returns the context sentence with maximal distinct-token overlap with
/// the query; ties go to the earliest sentence in retrieval order.
#[derive(Debug, Default, Clone)]
pub struct ExtractiveGenerator;

impl Generator for ExtractiveGenerator {
    fn name(&self) -> &'static str {
        "extractive"
    }

    fn generate(&self, parts: &PromptParts) -> Result<String, GenerationError> {
        let query_tokens: std::collections::BTreeSet<String> =
            tokenize(&parts.query).into_iter().collect();
        let mut best: Option<(usize, String)> = None;
        for text in &parts.context {
            for sentence in sentences(text) {
                let overlap = tokenize(&sentence)
                    .into_iter()
                    .collect::<std::collections::BTreeSet<_>>()
                    .intersection(&query_tokens)
                    .count();
                if best.as_ref().map_or(true, |(b, _)| overlap > *b) {
                    best = Some((overlap, sentence));
                }
            }
        }
        Ok(best.map_or_else(|| NO_CONTEXT_TEXT.to_string(), |(_, s)| s))
    }
}

/// Delegates to the configured model endpoint. The reply must carry the
/// answer either as `{"text": ...}` or as a bare JSON string.
pub struct RemoteGenerator {
    endpoint: std::sync::Arc<dyn ModelEndpoint>,
}

impl RemoteGenerator {
    pub fn new(endpoint: std::sync::Arc<dyn ModelEndpoint>) -> Self {
        Self { endpoint }
    }
}

impl Generator for RemoteGenerator {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn generate(&self, parts: &PromptParts) -> Result<String, GenerationError> {
        let payload = serde_json::json!({
            "prompt": crate::prompt::render_prompt(parts),
        });
        let reply = self
            .endpoint
            .call(Role::Generator, &payload)
            .map_err(|e| GenerationError::Backend(e.to_string()))?;
        match reply {
            Value::String(s) => Ok(s),
            Value::Object(map) => map
                .get("text")
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| GenerationError::Backend("reply missing `text` field".into())),
            other => Err(GenerationError::Backend(format!("unexpected reply shape: {other}"))),
        }
    }
}

/// Run a backend and convert failure into a refusal answer.
pub fn generate_or_refuse(backend: &dyn Generator, parts: &PromptParts) -> GeneratedAnswer {
    match backend.generate(parts) {
        Ok(text) => GeneratedAnswer::unmasked(text),
        Err(_) => GeneratedAnswer::unmasked(REFUSAL_TEXT),
    }
}
