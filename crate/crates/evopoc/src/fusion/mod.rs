//! Fuses case-level subgraphs into the global HKG.
//!
//! Candidate matching is two-staged: a type-filtered lookup restricts the
//! search to the same ontology sublayer, then a dense top-k search over
//! node-description embeddings ranks semantic neighbors. An equivalence
//! judge (deterministic by default, LLM-backed when configured) classifies
//! each candidate, and nodes merge, become parallel variants, or insert
//! fresh accordingly. Edges are added only once both endpoints are resolved.

mod embedding;
mod index;
mod ingest;

pub use embedding::{cosine, EmbeddingProvider, EmbeddingVector, HashedEmbedding};
pub use index::EmbeddingIndex;
pub use ingest::{
    ingest_case, ingest_import, CaseSubgraph, CosineJudge, EdgeOutcome, Equivalence,
    EquivalenceJudge, FusionConfig, FusionError, FusionReport, NodeOutcome, ScriptedJudge,
};
