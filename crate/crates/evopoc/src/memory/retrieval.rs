//! Seed retrieval, intra-layer expansion, and cross-layer transitions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fusion::{EmbeddingIndex, EmbeddingProvider};
use crate::ontology::{Direction, HkgGraph, LayerTag, NodeId, NodeKind};
use crate::oracle::OracleError;

use super::relevance::RelevanceOracle;
use super::types::{
    ContractContext, TraceEntry, TracePhase, TransitionPhase, TransitionRecord, WmStatus,
    WorkingMemory,
};

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("no protocol-level seed found for the contract context")]
    NoSeedFound,
    #[error("oracle failure: {0}")]
    Oracle(#[from] OracleError),
    #[error("invalid working-memory state: {0}")]
    InvalidState(String),
}

#[derive(Debug, Clone)]
pub struct MemoryConfig {
    /// Seeds accepted from the initial protocol-level retrieval.
    pub seed_k: usize,
    /// Sparse-phase confidence threshold for cross-layer transitions.
    pub confidence_threshold: f64,
    /// Maximum hops from a layer seed during expansion.
    pub hop_budget: usize,
    /// Candidates offered to the oracle in the dense transition phase.
    pub dense_k: usize,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        MemoryConfig {
            seed_k: 1,
            confidence_threshold: 0.5,
            hop_budget: 6,
            dense_k: 5,
        }
    }
}

/// Dense top-k over protocol-level primary-category nodes.
pub fn seed_retrieval(
    graph: &HkgGraph,
    index: &EmbeddingIndex,
    provider: &dyn EmbeddingProvider,
    ctx: &ContractContext,
    k: usize,
) -> Vec<(NodeId, f32)> {
    let query = provider.embed(&ctx.summary);
    index
        .topk_similar(
            LayerTag::ContractSemantics,
            NodeKind::Protocol,
            &query,
            usize::MAX,
        )
        .into_iter()
        .filter(|(id, _)| {
            graph
                .node(id)
                .map(|n| n.granularity == crate::ontology::Granularity::PrimaryCategory)
                .unwrap_or(false)
        })
        .take(k)
        .collect()
}

/// Breadth-first intra-layer expansion of the current layer.
///
/// Pops frontier nodes, offers their unevaluated one-hop neighbors (both
/// directions, same layer) to the oracle in (edge kind, neighbor id) order,
/// and keeps growing until the frontier is empty or the hop budget is spent.
/// A candidate is never queried twice; rejections still land in the trace.
pub fn expand_layer(
    graph: &HkgGraph,
    wm: &mut WorkingMemory,
    ctx: &ContractContext,
    oracle: &mut dyn RelevanceOracle,
    config: &MemoryConfig,
) -> Result<(), MemoryError> {
    let layer = wm.current_layer;
    if wm.accepted_in(layer).is_empty() {
        return Err(MemoryError::InvalidState(format!(
            "no accepted node in {layer:?} to expand from"
        )));
    }
    while let Some((node_id, hop)) = wm.frontier.pop_front() {
        if hop >= config.hop_budget {
            continue;
        }
        let mut candidates: Vec<(crate::ontology::EdgeKind, NodeId)> = Vec::new();
        for direction in [Direction::Out, Direction::In] {
            for (edge, neighbor) in graph
                .neighbors(&node_id, direction, &[])
                .map_err(|e| MemoryError::InvalidState(e.to_string()))?
            {
                if neighbor.layer == layer {
                    candidates.push((edge.kind, neighbor.id.clone()));
                }
            }
        }
        candidates.sort();
        candidates.dedup_by(|a, b| a.1 == b.1);
        for (_, candidate_id) in candidates {
            if wm.is_accepted(&candidate_id) || wm.evaluated().contains(&candidate_id) {
                continue;
            }
            let node = graph.node(&candidate_id).expect("neighbor exists");
            let verdict = oracle.assess(ctx, node)?;
            let keep = verdict.keep;
            wm.trace.push(TraceEntry {
                candidate: candidate_id.clone(),
                verdict,
                hop: hop + 1,
                phase: TracePhase::Expansion,
            });
            if keep {
                wm.accept(layer, candidate_id, hop + 1);
            }
        }
    }
    Ok(())
}

/// Sparse-dense hybrid transition into `target`.
///
/// Sparse phase: each accepted source node with at least one cross-layer edge
/// into `target` votes for the nodes it links to; a candidate whose share of
/// voters reaches the confidence threshold becomes the seed (ties broken by
/// dense similarity, then id). Dense phase: top-k similarity over the target
/// layer's anchor kind, with the oracle picking the first plausible node.
pub fn cross_layer_transition(
    graph: &HkgGraph,
    index: &EmbeddingIndex,
    wm: &mut WorkingMemory,
    target: LayerTag,
    ctx: &ContractContext,
    oracle: &mut dyn RelevanceOracle,
    config: &MemoryConfig,
) -> Result<Option<NodeId>, MemoryError> {
    let source_layer = wm.current_layer;
    let sources = wm.accepted_in(source_layer).to_vec();
    if sources.is_empty() {
        return Err(MemoryError::InvalidState(format!(
            "no accepted node in {source_layer:?} to transition from"
        )));
    }

    // sparse phase: convergence among informed voters
    let mut votes: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let mut informed = 0usize;
    for source in &sources {
        let outs = graph
            .neighbors(source, Direction::Out, &[])
            .map_err(|e| MemoryError::InvalidState(e.to_string()))?;
        let targets: Vec<NodeId> = outs
            .into_iter()
            .filter(|(_, n)| n.layer == target)
            .map(|(_, n)| n.id.clone())
            .collect();
        if targets.is_empty() {
            continue;
        }
        informed += 1;
        for t in targets {
            let voters = votes.entry(t).or_default();
            if !voters.contains(source) {
                voters.push(source.clone());
            }
        }
    }

    if informed > 0 {
        let mut scored: Vec<(NodeId, f64)> = votes
            .iter()
            .map(|(id, voters)| (id.clone(), voters.len() as f64 / informed as f64))
            .collect();
        scored.sort_by(|(ida, ca), (idb, cb)| {
            cb.partial_cmp(ca)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| {
                    let sa = index.similarity(ida, &wm.query).unwrap_or(0.0);
                    let sb = index.similarity(idb, &wm.query).unwrap_or(0.0);
                    sb.partial_cmp(&sa).unwrap_or(std::cmp::Ordering::Equal)
                })
                .then_with(|| ida.cmp(idb))
        });
        if let Some((best, confidence)) = scored.first().cloned() {
            if confidence >= config.confidence_threshold {
                for voter in &votes[&best] {
                    for (edge, _) in graph
                        .neighbors(voter, Direction::Out, &[])
                        .map_err(|e| MemoryError::InvalidState(e.to_string()))?
                    {
                        if edge.dst == best {
                            wm.cross_layer_links.push(edge);
                        }
                    }
                }
                wm.transitions.push(TransitionRecord {
                    target,
                    phase: TransitionPhase::Sparse { confidence },
                    seed: Some(best.clone()),
                });
                return Ok(Some(best));
            }
        }
    }

    // dense fallback over the target layer's anchor kind
    let anchor = match target {
        LayerTag::FailureMode => NodeKind::FailurePattern,
        LayerTag::ExploitPrimitive => NodeKind::Skeleton,
        LayerTag::ContractSemantics => NodeKind::Protocol,
    };
    let ranked = index.topk_similar(target, anchor, &wm.query, config.dense_k);
    for (candidate_id, _) in ranked {
        if wm.is_accepted(&candidate_id) || wm.evaluated().contains(&candidate_id) {
            continue;
        }
        let node = graph.node(&candidate_id).expect("indexed node exists");
        let verdict = oracle.assess(ctx, node)?;
        let keep = verdict.keep;
        wm.trace.push(TraceEntry {
            candidate: candidate_id.clone(),
            verdict,
            hop: 0,
            phase: TracePhase::DenseTransition,
        });
        if keep {
            wm.transitions.push(TransitionRecord {
                target,
                phase: TransitionPhase::Dense,
                seed: Some(candidate_id.clone()),
            });
            return Ok(Some(candidate_id));
        }
    }
    wm.transitions.push(TransitionRecord {
        target,
        phase: TransitionPhase::Dense,
        seed: None,
    });
    Ok(None)
}

/// Full working-memory construction: seed, expand the contract-semantics
/// layer, transition and expand failure mode, then exploit primitive.
///
/// A transition that produces no seed returns the partial memory with
/// `status = Stalled(layer)` instead of failing.
pub fn build_working_memory(
    graph: &HkgGraph,
    index: &EmbeddingIndex,
    provider: &dyn EmbeddingProvider,
    ctx: &ContractContext,
    oracle: &mut dyn RelevanceOracle,
    config: &MemoryConfig,
) -> Result<WorkingMemory, MemoryError> {
    let mut wm = WorkingMemory::new(provider.embed(&ctx.summary));
    let seeds = seed_retrieval(graph, index, provider, ctx, config.seed_k);
    if seeds.is_empty() {
        return Err(MemoryError::NoSeedFound);
    }
    for (seed, _) in seeds {
        wm.accept(LayerTag::ContractSemantics, seed, 0);
    }
    expand_layer(graph, &mut wm, ctx, oracle, config)?;

    for target in [LayerTag::FailureMode, LayerTag::ExploitPrimitive] {
        match cross_layer_transition(graph, index, &mut wm, target, ctx, oracle, config)? {
            Some(seed) => {
                wm.current_layer = target;
                wm.accept(target, seed, 0);
                expand_layer(graph, &mut wm, ctx, oracle, config)?;
            }
            None => {
                wm.status = WmStatus::Stalled(target);
                return Ok(wm);
            }
        }
    }
    wm.status = WmStatus::Complete;
    Ok(wm)
}
