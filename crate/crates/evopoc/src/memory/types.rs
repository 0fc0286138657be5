//! Working-memory data shapes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::fusion::EmbeddingVector;
use crate::ontology::{HkgEdge, LayerTag, NodeId};

/// Summary and structural inventory of the contract under analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractContext {
    pub summary: String,
    pub functions: Vec<FunctionInfo>,
    /// Digest of the source set, used for cache keying.
    pub source_digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionInfo {
    pub name: String,
    pub visibility: String,
    pub modifiers: Vec<String>,
}

impl ContractContext {
    pub fn new(summary: impl Into<String>) -> Self {
        ContractContext {
            summary: summary.into(),
            functions: Vec::new(),
            source_digest: String::new(),
        }
    }
}

/// Oracle answer for one candidate node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceVerdict {
    pub keep: bool,
    pub confidence: f64,
    pub rationale: String,
}

impl RelevanceVerdict {
    pub fn reject(rationale: impl Into<String>) -> Self {
        RelevanceVerdict {
            keep: false,
            confidence: 0.0,
            rationale: rationale.into(),
        }
    }
}

/// Where in the workflow a candidate was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TracePhase {
    Expansion,
    DenseTransition,
}

/// One oracle evaluation; every candidate appears here exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub candidate: NodeId,
    pub verdict: RelevanceVerdict,
    pub hop: usize,
    pub phase: TracePhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TransitionPhase {
    Sparse { confidence: f64 },
    Dense,
}

/// Outcome of one cross-layer transition attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub target: LayerTag,
    pub phase: TransitionPhase,
    pub seed: Option<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WmStatus {
    Building,
    Complete,
    /// Reasoning stalled before this layer could be seeded.
    Stalled(LayerTag),
}

/// The reasoning subgraph assembled for one analysis task.
#[derive(Debug, Clone)]
pub struct WorkingMemory {
    /// Embedded contract summary; drives every dense phase.
    pub query: EmbeddingVector,
    /// Accepted nodes per layer, in acceptance order.
    pub accepted: BTreeMap<LayerTag, Vec<NodeId>>,
    /// Cross-layer edges that justified sparse transitions.
    pub cross_layer_links: Vec<HkgEdge>,
    /// Accepted nodes whose neighborhoods are still unexplored, with hop index.
    pub frontier: VecDeque<(NodeId, usize)>,
    pub trace: Vec<TraceEntry>,
    pub transitions: Vec<TransitionRecord>,
    pub current_layer: LayerTag,
    pub status: WmStatus,
}

impl WorkingMemory {
    pub fn new(query: EmbeddingVector) -> Self {
        WorkingMemory {
            query,
            accepted: BTreeMap::new(),
            cross_layer_links: Vec::new(),
            frontier: VecDeque::new(),
            trace: Vec::new(),
            transitions: Vec::new(),
            current_layer: LayerTag::ContractSemantics,
            status: WmStatus::Building,
        }
    }

    pub fn accepted_in(&self, layer: LayerTag) -> &[NodeId] {
        self.accepted.get(&layer).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn accept(&mut self, layer: LayerTag, id: NodeId, hop: usize) {
        self.accepted.entry(layer).or_default().push(id.clone());
        self.frontier.push_back((id, hop));
    }

    pub fn is_accepted(&self, id: &NodeId) -> bool {
        self.accepted.values().any(|v| v.contains(id))
    }

    pub fn evaluated(&self) -> BTreeSet<&NodeId> {
        self.trace.iter().map(|t| &t.candidate).collect()
    }

    pub fn all_accepted(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for layer in LayerTag::ALL {
            out.extend(self.accepted_in(layer).iter().cloned());
        }
        out
    }

    /// Serializable digest handed to plan-generation backends.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "accepted": {
                "contract_semantics": self.accepted_in(LayerTag::ContractSemantics),
                "failure_mode": self.accepted_in(LayerTag::FailureMode),
                "exploit_primitive": self.accepted_in(LayerTag::ExploitPrimitive),
            },
            "cross_layer_links": self.cross_layer_links,
            "status": self.status,
        })
    }
}
