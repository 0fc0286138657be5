//! Case ingestion: candidate lookup, equivalence judging, merging.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{HkgEdge, HkgGraph, HkgNode, NodeId, StoreError};

use super::embedding::{EmbeddingProvider, EmbeddingVector};
use super::index::EmbeddingIndex;

/// Ingestion contract: a pre-extracted, ontology-conformant case file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseSubgraph {
    pub case_id: String,
    pub nodes: Vec<HkgNode>,
    pub edges: Vec<HkgEdge>,
}

impl CaseSubgraph {
    pub fn from_json_str(text: &str) -> Result<Self, FusionError> {
        serde_json::from_str(text).map_err(|e| FusionError::MalformedCase(e.to_string()))
    }
}

/// Verdict on whether an incoming node matches an existing one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Variant,
    Distinct,
}

/// Classifies candidate matches during fusion.
pub trait EquivalenceJudge {
    fn judge(
        &mut self,
        existing: &HkgNode,
        incoming: &HkgNode,
        similarity: f32,
    ) -> Result<Equivalence, FusionError>;
}

/// Deterministic default: same kind and normalized-description cosine >= tau.
///
/// Never answers `Variant` on its own; variant preservation is a judgment
/// call left to scripted or LLM-backed judges.
#[derive(Debug, Clone)]
pub struct CosineJudge {
    pub tau: f32,
}

impl Default for CosineJudge {
    fn default() -> Self {
        CosineJudge { tau: 0.95 }
    }
}

impl EquivalenceJudge for CosineJudge {
    fn judge(
        &mut self,
        existing: &HkgNode,
        incoming: &HkgNode,
        similarity: f32,
    ) -> Result<Equivalence, FusionError> {
        if existing.kind == incoming.kind && similarity >= self.tau {
            Ok(Equivalence::Equivalent)
        } else {
            Ok(Equivalence::Distinct)
        }
    }
}

/// Test judge replaying canned verdicts keyed by (existing id, incoming
/// description) pairs; anything unmatched falls back to [`CosineJudge`].
#[derive(Debug, Default)]
pub struct ScriptedJudge {
    pub verdicts: Vec<(String, String, Equivalence)>,
    fallback: CosineJudge,
}

impl ScriptedJudge {
    pub fn new(verdicts: Vec<(String, String, Equivalence)>) -> Self {
        ScriptedJudge {
            verdicts,
            fallback: CosineJudge::default(),
        }
    }
}

impl EquivalenceJudge for ScriptedJudge {
    fn judge(
        &mut self,
        existing: &HkgNode,
        incoming: &HkgNode,
        similarity: f32,
    ) -> Result<Equivalence, FusionError> {
        for (id, desc, verdict) in &self.verdicts {
            if existing.id.as_str() == id && incoming.description == *desc {
                return Ok(*verdict);
            }
        }
        self.fallback.judge(existing, incoming, similarity)
    }
}

/// Per-node fusion outcome, one per case node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum NodeOutcome {
    Inserted { id: NodeId },
    MergedInto { id: NodeId },
    KeptAsVariant { id: NodeId, sibling: NodeId },
}

/// Per-edge fusion outcome, one per case edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EdgeOutcome {
    Added,
    AlreadyPresent,
    Deferred { reason: String },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FusionReport {
    pub case_id: String,
    pub nodes: Vec<(NodeId, NodeOutcome)>,
    pub edges: Vec<(HkgEdge, EdgeOutcome)>,
}

impl FusionReport {
    pub fn inserted(&self) -> usize {
        self.count_nodes(|o| matches!(o, NodeOutcome::Inserted { .. }))
    }

    pub fn merged(&self) -> usize {
        self.count_nodes(|o| matches!(o, NodeOutcome::MergedInto { .. }))
    }

    pub fn variants(&self) -> usize {
        self.count_nodes(|o| matches!(o, NodeOutcome::KeptAsVariant { .. }))
    }

    pub fn deferred_edges(&self) -> usize {
        self.edges
            .iter()
            .filter(|(_, o)| matches!(o, EdgeOutcome::Deferred { .. }))
            .count()
    }

    fn count_nodes(&self, pred: impl Fn(&NodeOutcome) -> bool) -> usize {
        self.nodes.iter().filter(|(_, o)| pred(o)).count()
    }

    /// Global id a case-local node id resolved to, if any.
    pub fn resolved(&self, local: &NodeId) -> Option<&NodeId> {
        self.nodes.iter().find(|(l, _)| l == local).map(|(_, o)| match o {
            NodeOutcome::Inserted { id }
            | NodeOutcome::MergedInto { id }
            | NodeOutcome::KeptAsVariant { id, .. } => id,
        })
    }
}

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("malformed case: {0}")]
    MalformedCase(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("equivalence judge failed: {0}")]
    Judge(String),
}

#[derive(Debug, Clone)]
pub struct FusionConfig {
    /// Candidates retrieved per node before judging.
    pub candidate_k: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig { candidate_k: 5 }
    }
}

/// Validate that a case is ontology-conformant by materializing it in a
/// scratch store. Catches layer/kind mismatches, inadmissible edges, and
/// dangling endpoints before the global graph is touched.
fn preflight(case: &CaseSubgraph, require_case_provenance: bool) -> Result<(), FusionError> {
    let mut scratch = HkgGraph::new();
    for node in &case.nodes {
        if node.id.is_empty() {
            return Err(FusionError::MalformedCase("case node without id".into()));
        }
        if require_case_provenance {
            let expected: std::collections::BTreeSet<String> =
                std::iter::once(case.case_id.clone()).collect();
            if node.provenance != expected {
                return Err(FusionError::MalformedCase(format!(
                    "node {} provenance must equal {{{}}}",
                    node.id, case.case_id
                )));
            }
        } else if node.provenance.is_empty() {
            return Err(FusionError::MalformedCase(format!(
                "node {} has empty provenance",
                node.id
            )));
        }
        scratch.add_node(node.clone())?;
    }
    for edge in &case.edges {
        // edges between case-local nodes must be admissible up front;
        // references to global nodes resolve (or defer) in the edge pass
        if scratch.contains(&edge.src) && scratch.contains(&edge.dst) {
            scratch.add_edge(edge.clone())?;
        }
    }
    Ok(())
}

/// Integrate one case-level subgraph into the global HKG.
///
/// Per node: exact content-hash duplicates merge immediately; otherwise the
/// type-filtered top-k candidates are judged in rank order and the node is
/// merged, kept as a variant sibling, or inserted. Edges are remapped through
/// the per-node resolutions and added at the end; an edge that still cannot
/// be placed is reported as deferred, never silently dropped.
pub fn ingest_case(
    graph: &mut HkgGraph,
    index: &mut EmbeddingIndex,
    provider: &dyn EmbeddingProvider,
    case: &CaseSubgraph,
    judge: &mut dyn EquivalenceJudge,
    config: &FusionConfig,
) -> Result<FusionReport, FusionError> {
    ingest_inner(graph, index, provider, case, judge, config, true)
}

/// Ingest a previously exported graph document as a case. Provenance is
/// carried over verbatim instead of being required to equal the case id.
pub fn ingest_import(
    graph: &mut HkgGraph,
    index: &mut EmbeddingIndex,
    provider: &dyn EmbeddingProvider,
    case: &CaseSubgraph,
    judge: &mut dyn EquivalenceJudge,
    config: &FusionConfig,
) -> Result<FusionReport, FusionError> {
    ingest_inner(graph, index, provider, case, judge, config, false)
}

fn ingest_inner(
    graph: &mut HkgGraph,
    index: &mut EmbeddingIndex,
    provider: &dyn EmbeddingProvider,
    case: &CaseSubgraph,
    judge: &mut dyn EquivalenceJudge,
    config: &FusionConfig,
    require_case_provenance: bool,
) -> Result<FusionReport, FusionError> {
    preflight(case, require_case_provenance)?;

    let mut report = FusionReport {
        case_id: case.case_id.clone(),
        ..FusionReport::default()
    };
    let mut resolution: BTreeMap<NodeId, NodeId> = BTreeMap::new();

    for incoming in &case.nodes {
        let local_id = incoming.id.clone();
        let vector = match &incoming.embedding {
            Some(raw) if raw.len() == provider.dimension() => EmbeddingVector(raw.clone()),
            _ => provider.embed(&incoming.description),
        };

        let outcome = resolve_node(graph, index, incoming, &vector, judge, config)?;
        match &outcome {
            NodeOutcome::MergedInto { id } => {
                let node = graph.node_mut(id).expect("merge target exists");
                for p in &incoming.provenance {
                    node.provenance.insert(p.clone());
                }
                resolution.insert(local_id.clone(), id.clone());
            }
            NodeOutcome::Inserted { id } | NodeOutcome::KeptAsVariant { id, .. } => {
                resolution.insert(local_id.clone(), id.clone());
            }
        }
        report.nodes.push((local_id, outcome));
    }

    // Edge pass: all case nodes are resolved now. Endpoints that are not
    // case-local may name global nodes directly.
    for edge in &case.edges {
        let src = resolution.get(&edge.src).cloned().unwrap_or_else(|| edge.src.clone());
        let dst = resolution.get(&edge.dst).cloned().unwrap_or_else(|| edge.dst.clone());
        let mapped = HkgEdge {
            src,
            dst,
            kind: edge.kind,
        };
        let outcome = if !graph.contains(&mapped.src) || !graph.contains(&mapped.dst) {
            let missing = if graph.contains(&mapped.src) {
                &mapped.dst
            } else {
                &mapped.src
            };
            EdgeOutcome::Deferred {
                reason: format!("missing endpoint {missing}"),
            }
        } else if graph.edges().any(|e| *e == mapped) {
            EdgeOutcome::AlreadyPresent
        } else {
            match graph.add_edge(mapped.clone()) {
                Ok(()) => EdgeOutcome::Added,
                // merge side effects (e.g. a second hierarchy parent) are
                // reported rather than aborting a half-applied ingest
                Err(e) => EdgeOutcome::Deferred {
                    reason: e.to_string(),
                },
            }
        };
        report.edges.push((edge.clone(), outcome));
    }

    Ok(report)
}

fn resolve_node(
    graph: &mut HkgGraph,
    index: &mut EmbeddingIndex,
    incoming: &HkgNode,
    vector: &EmbeddingVector,
    judge: &mut dyn EquivalenceJudge,
    config: &FusionConfig,
) -> Result<NodeOutcome, FusionError> {
    // Exact-duplicate fast path over the content hash (kind + normalized
    // description); identical records merge without consulting the judge.
    let hash = incoming.content_hash();
    if let Some(existing) = graph
        .nodes()
        .find(|n| n.kind == incoming.kind && n.content_hash() == hash)
    {
        return Ok(NodeOutcome::MergedInto {
            id: existing.id.clone(),
        });
    }

    let ranked = index.topk_similar(incoming.layer, incoming.kind, vector, usize::MAX);
    let candidates: Vec<(NodeId, f32)> = ranked
        .into_iter()
        .filter(|(id, _)| {
            graph
                .node(id)
                .map(|n| n.granularity == incoming.granularity)
                .unwrap_or(false)
        })
        .take(config.candidate_k)
        .collect();

    for (candidate_id, similarity) in candidates {
        let existing = graph.node(&candidate_id).expect("indexed node exists");
        match judge.judge(existing, incoming, similarity)? {
            Equivalence::Equivalent => {
                return Ok(NodeOutcome::MergedInto { id: candidate_id });
            }
            Equivalence::Variant => {
                let id = insert_fresh(graph, index, incoming, vector, Some(candidate_id.clone()))?;
                return Ok(NodeOutcome::KeptAsVariant {
                    id,
                    sibling: candidate_id,
                });
            }
            Equivalence::Distinct => continue,
        }
    }

    let id = insert_fresh(graph, index, incoming, vector, None)?;
    Ok(NodeOutcome::Inserted { id })
}

fn insert_fresh(
    graph: &mut HkgGraph,
    index: &mut EmbeddingIndex,
    incoming: &HkgNode,
    vector: &EmbeddingVector,
    variant_of: Option<NodeId>,
) -> Result<NodeId, FusionError> {
    let mut node = incoming.clone();
    node.embedding = Some(vector.0.clone());
    node.variant_of = variant_of;
    // keep readable case-local ids when free; fall back to a fresh opaque id
    if graph.contains(&node.id) {
        node.id = NodeId::default();
    }
    let id = graph.add_node(node)?;
    index.insert(id.clone(), incoming.layer, incoming.kind, vector);
    Ok(id)
}
