//! Three-layer hierarchical knowledge graph: schema, typed store, and
//! edge-admissibility enforcement.
//!
//! Nodes live in one of three semantic layers — contract semantics, failure
//! mode, exploit primitive — and every edge kind carries a fixed rule about
//! which node kinds it may connect. The store rejects anything that violates
//! the schema, so a loaded graph is ontology-conformant by construction.

mod schema;
mod store;

pub use schema::{
    admissible, allowed_pairs, EdgeKind, Granularity, LayerTag, NodeKind, PrimitiveRole,
};
pub use store::{Direction, HkgEdge, HkgGraph, HkgNode, NodeId, StoreError};
pub(crate) use store::normalize_description;
