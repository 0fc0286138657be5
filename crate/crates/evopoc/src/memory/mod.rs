//! Task-specific working memory.
//!
//! Given a target contract, relevant knowledge is pulled out of the global
//! HKG into a working-memory subgraph: dense retrieval seeds the
//! contract-semantics layer, breadth-first intra-layer expansion grows it
//! under a relevance oracle, and cross-layer transitions use a sparse-dense
//! hybrid — link convergence among already-accepted nodes first, dense
//! similarity over the target layer's anchor kinds as the fallback.

mod relevance;
mod retrieval;
mod types;

pub use relevance::{
    AcceptAll, RejectAll, RelevanceEntry, RelevanceOracle, ScriptedRelevanceOracle,
};
pub use retrieval::{
    build_working_memory, cross_layer_transition, expand_layer, seed_retrieval, MemoryConfig,
    MemoryError,
};
pub use types::{
    ContractContext, FunctionInfo, RelevanceVerdict, TraceEntry, TracePhase, TransitionPhase,
    TransitionRecord, WmStatus, WorkingMemory,
};
