//! Deterministic scripted backend for tests and offline runs.

use std::collections::VecDeque;

use serde::Deserialize;
use serde_json::Value;

use crate::memory::RelevanceEntry;

use super::backend::{BackendRequest, BackendResponse, OracleError, ReasoningBackend, SchemaTag};

/// One canned exchange: the expected schema tag, an optional substring the
/// request must contain, and the structured payload to return.
#[derive(Debug, Clone, Deserialize)]
pub struct TranscriptEntry {
    pub schema: SchemaTag,
    #[serde(default)]
    pub expect: Option<String>,
    pub response: Value,
}

/// Transcript file: relevance verdicts for working-memory construction plus
/// ordered plan/script payloads for the synthesis loop.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct Transcript {
    #[serde(default)]
    pub relevance: Vec<RelevanceEntry>,
    #[serde(default)]
    pub plans: Vec<Value>,
    #[serde(default)]
    pub scripts: Vec<Value>,
    #[serde(default)]
    pub chat: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn from_json_str(text: &str) -> Result<Self, OracleError> {
        serde_json::from_str(text).map_err(|e| OracleError::Schema(e.to_string()))
    }
}

/// Replays a transcript's payloads strictly in order, per schema kind.
/// Requests beyond the transcript fail with `Exhausted`; a `chat` entry whose
/// expectation does not match the request is a hard mismatch.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    plans: VecDeque<Value>,
    scripts: VecDeque<Value>,
    chat: VecDeque<TranscriptEntry>,
    pub requests_served: usize,
}

impl ScriptedBackend {
    pub fn new(transcript: Transcript) -> Self {
        ScriptedBackend {
            plans: transcript.plans.into(),
            scripts: transcript.scripts.into(),
            chat: transcript.chat.into(),
            requests_served: 0,
        }
    }

    pub fn with_plans_and_scripts(plans: Vec<Value>, scripts: Vec<Value>) -> Self {
        ScriptedBackend {
            plans: plans.into(),
            scripts: scripts.into(),
            chat: VecDeque::new(),
            requests_served: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.plans.len() + self.scripts.len() + self.chat.len()
    }
}

impl ReasoningBackend for ScriptedBackend {
    fn chat(&mut self, request: &BackendRequest) -> Result<BackendResponse, OracleError> {
        self.requests_served += 1;
        let payload = match request.schema {
            SchemaTag::Plan => self.plans.pop_front().ok_or(OracleError::Exhausted)?,
            SchemaTag::Script => self.scripts.pop_front().ok_or(OracleError::Exhausted)?,
            _ => {
                let entry = self.chat.pop_front().ok_or(OracleError::Exhausted)?;
                if entry.schema != request.schema {
                    return Err(OracleError::Mismatch(format!(
                        "expected {:?}, request was {:?}",
                        entry.schema, request.schema
                    )));
                }
                if let Some(needle) = &entry.expect {
                    let haystack: String = request
                        .messages
                        .iter()
                        .map(|m| m.content.as_str())
                        .collect::<Vec<_>>()
                        .join("\n");
                    if !haystack.contains(needle.as_str()) {
                        return Err(OracleError::Mismatch(format!(
                            "request does not mention `{needle}`"
                        )));
                    }
                }
                entry.response
            }
        };
        Ok(BackendResponse {
            text: payload.to_string(),
            payload,
        })
    }
}
