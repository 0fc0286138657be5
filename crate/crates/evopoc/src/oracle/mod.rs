//! Pluggable reasoning providers.
//!
//! Everything the engine asks a language model for — relevance judgments,
//! equivalence calls, exploit plans, exploit scripts — goes through traits
//! with two families of implementations: deterministic scripted transcripts
//! for tests and offline runs, and a generic chat-completion HTTP client for
//! live use. Structured payloads are schema-validated before they reach the
//! rest of the pipeline.

mod backend;
mod http;
mod providers;
mod scripted;

pub use backend::{
    extract_json_payload, BackendRequest, BackendResponse, Message, OracleError, ReasoningBackend,
    SchemaTag,
};
pub use http::{HttpBackend, HttpBackendConfig};
pub use providers::{chat, BackendPlanOracle, BackendRelevanceOracle, PlanResponse, ScriptResponse};
pub use scripted::{ScriptedBackend, Transcript, TranscriptEntry};
