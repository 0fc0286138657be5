//! Backend request/response surface shared by scripted and live providers.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// What shape of structured payload a request expects back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaTag {
    Relevance,
    Equivalence,
    Plan,
    Script,
    Summary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: "user".into(),
            content: content.into(),
        }
    }
}

/// Role-tagged message list plus the expected-output schema tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendRequest {
    pub schema: SchemaTag,
    pub messages: Vec<Message>,
}

impl BackendRequest {
    pub fn new(schema: SchemaTag, messages: Vec<Message>) -> Self {
        BackendRequest { schema, messages }
    }
}

/// Raw text plus the parsed structured payload.
#[derive(Debug, Clone)]
pub struct BackendResponse {
    pub text: String,
    pub payload: Value,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("transcript exhausted")]
    Exhausted,
    #[error("transcript mismatch: {0}")]
    Mismatch(String),
    #[error("backend timeout")]
    Timeout,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("backend not configured: {0}")]
    NotConfigured(String),
}

/// A reasoning backend answering one request at a time.
pub trait ReasoningBackend: Send {
    fn chat(&mut self, request: &BackendRequest) -> Result<BackendResponse, OracleError>;
}

/// Extract the structured payload from a model reply: the first fenced
/// ```json block wins, otherwise the first balanced top-level JSON value.
pub fn extract_json_payload(text: &str) -> Result<Value, OracleError> {
    if let Some(start) = text.find("```json") {
        let rest = &text[start + 7..];
        if let Some(end) = rest.find("```") {
            return serde_json::from_str(rest[..end].trim())
                .map_err(|e| OracleError::Schema(format!("fenced block: {e}")));
        }
    }
    let trimmed = text.trim();
    if let Some(idx) = trimmed.find(['{', '[']) {
        let candidate = &trimmed[idx..];
        let mut de = serde_json::Deserializer::from_str(candidate);
        if let Ok(v) = Value::deserialize(&mut de) {
            return Ok(v);
        }
    }
    Err(OracleError::Schema("no JSON payload in response".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_block_preferred() {
        let text = "Reasoning...\n```json\n{\"steps\": []}\n```\ntrailing prose";
        let v = extract_json_payload(text).unwrap();
        assert_eq!(v["steps"], serde_json::json!([]));
    }

    #[test]
    fn bare_json_accepted() {
        let v = extract_json_payload("  {\"keep\": true, \"confidence\": 0.9} ").unwrap();
        assert_eq!(v["keep"], serde_json::json!(true));
    }

    #[test]
    fn prose_without_payload_is_schema_error() {
        assert!(matches!(
            extract_json_payload("no structure here").unwrap_err(),
            OracleError::Schema(_)
        ));
    }
}
