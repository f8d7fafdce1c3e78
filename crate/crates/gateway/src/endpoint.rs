//! Chat-completion endpoint client.
//!
//! Sends role-specific requests in the OpenAI-compatible chat shape
//! (Ollama and similar servers speak it too) with a fixed system prompt
//! per role, a bounded timeout, and typed failures. Control-plane roles
//! ask for structured JSON replies; generation and judging are free text
//! that the caller parses.

use std::collections::BTreeMap;
use std::time::Duration;

use serde_json::{json, Value};

use ragward_core::generate::EndpointError;
use ragward_core::{ModelEndpoint, Role};

use crate::config::{EndpointConfig, EndpointsConfig};

fn system_prompt(role: Role) -> &'static str {
    match role {
        Role::Sentinel => {
            "You assess the risk of one retrieval query from structured telemetry. \
             Reply with exactly one JSON object: {\"level\": \"LOW\"|\"ELEVATED\"|\"CRITICAL\", \
             \"p_mia\": number, \"p_poi\": number, \"p_leak\": number (each in [0,1]), \
             \"delta\": number in [-0.1, 0.1], \"rationale\": string}. No other text."
        }
        Role::Strategist => {
            "You map a risk profile to a defense plan. Reply with exactly one JSON object: \
             {\"stage\": \"STAGE_1\"|\"STAGE_2\", \"config\": {defense switches and parameters}, \
             \"hook_bindings\": {hook name: [defense names]}}. Stage-1 plans may only set \
             sanitize/DP fields; stage-2 plans may only set trustrag/av/audit fields. No other text."
        }
        Role::Generator => {
            "Answer the user query using only the provided context passages. Reply with the \
             answer text only."
        }
        Role::Judge => {
            "Judge the exchange. Reply with exactly one JSON object: {\"contextual_recall\": \
             number|null, \"contextual_relevancy\": number, \"answer_relevancy\": number, \
             \"faithfulness\": number}, each in [0,1]. No other text."
        }
    }
}

/// HTTP client over per-role endpoint configurations.
pub struct HttpModelEndpoint {
    endpoints: BTreeMap<&'static str, EndpointConfig>,
}

impl HttpModelEndpoint {
    pub fn new(config: &EndpointsConfig) -> Self {
        let mut endpoints = BTreeMap::new();
        let mut put = |role: Role, slot: &Option<EndpointConfig>| {
            if let Some(endpoint) = slot {
                endpoints.insert(role.as_str(), endpoint.clone());
            }
        };
        put(Role::Sentinel, &config.sentinel);
        put(Role::Strategist, &config.strategist);
        put(Role::Generator, &config.generator);
        put(Role::Judge, &config.judge);
        Self { endpoints }
    }
}

/// One call against `endpoint` in the chat-completion shape. The reply's
/// first choice content is returned; content that parses as JSON comes
/// back structured, anything else comes back as a JSON string.
pub fn model_endpoint_call(
    role: Role,
    payload: &Value,
    endpoint: &EndpointConfig,
) -> Result<Value, EndpointError> {
    let body = json!({
        "model": endpoint.model,
        "messages": [
            {"role": "system", "content": system_prompt(role)},
            {"role": "user", "content": payload.to_string()},
        ],
        "temperature": 0.0,
    });
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(endpoint.timeout_ms)))
        .build()
        .into();
    let mut response = agent
        .post(&endpoint.url)
        .send_json(&body)
        .map_err(|e| match e {
            ureq::Error::Timeout(_) => EndpointError::Timeout(endpoint.timeout_ms),
            other => EndpointError::Transport(other.to_string()),
        })?;
    let reply: Value = response
        .body_mut()
        .read_json()
        .map_err(|e| EndpointError::Schema(e.to_string()))?;
    let content = reply
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| EndpointError::Schema("reply missing choices[0].message.content".into()))?;
    Ok(serde_json::from_str::<Value>(content)
        .unwrap_or_else(|_| Value::String(content.to_string())))
}

impl ModelEndpoint for HttpModelEndpoint {
    fn call(&self, role: Role, payload: &Value) -> Result<Value, EndpointError> {
        let endpoint = self
            .endpoints
            .get(role.as_str())
            .ok_or(EndpointError::NotConfigured(role.as_str()))?;
        model_endpoint_call(role, payload, endpoint)
    }
}
