//! Brute-force dense index over node-description embeddings.
//!
//! The corpus sizes an HKG reaches (hundreds of nodes) make a linear cosine
//! scan the right trade-off; the type filter runs before the dense scan so
//! ranking only ever touches one ontology sublayer.

use std::collections::BTreeMap;

use crate::ontology::{LayerTag, NodeId, NodeKind};

use super::embedding::{cosine, EmbeddingVector};

#[derive(Debug, Clone)]
struct Entry {
    layer: LayerTag,
    kind: NodeKind,
    vector: Vec<f32>,
}

/// Type-filtered dense similarity index.
#[derive(Debug, Clone)]
pub struct EmbeddingIndex {
    dim: usize,
    entries: BTreeMap<NodeId, Entry>,
}

impl EmbeddingIndex {
    pub fn new(dim: usize) -> Self {
        EmbeddingIndex {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Insert or replace the vector for a node.
    pub fn insert(&mut self, id: NodeId, layer: LayerTag, kind: NodeKind, vector: &EmbeddingVector) {
        assert_eq!(
            vector.dim(),
            self.dim,
            "index dimension is fixed at construction"
        );
        self.entries.insert(
            id,
            Entry {
                layer,
                kind,
                vector: vector.0.clone(),
            },
        );
    }

    pub fn remove(&mut self, id: &NodeId) {
        self.entries.remove(id);
    }

    /// Cosine similarity between an indexed node and a query vector.
    pub fn similarity(&self, id: &NodeId, query: &EmbeddingVector) -> Option<f32> {
        self.entries.get(id).map(|e| cosine(&e.vector, &query.0))
    }

    /// Top-k semantic neighbors among nodes matching `(layer, kind)`.
    ///
    /// Descending similarity, ties broken by node id. `k` larger than the
    /// filtered population returns everything that matches.
    pub fn topk_similar(
        &self,
        layer: LayerTag,
        kind: NodeKind,
        query: &EmbeddingVector,
        k: usize,
    ) -> Vec<(NodeId, f32)> {
        let mut scored: Vec<(NodeId, f32)> = self
            .entries
            .iter()
            .filter(|(_, e)| e.layer == layer && e.kind == kind)
            .map(|(id, e)| (id.clone(), cosine(&e.vector, &query.0)))
            .collect();
        scored.sort_by(|(ida, sa), (idb, sb)| {
            sb.partial_cmp(sa)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| ida.cmp(idb))
        });
        scored.truncate(k);
        scored
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::embedding::{EmbeddingProvider, HashedEmbedding};

    fn fp(id: &str) -> NodeId {
        NodeId::new(id)
    }

    #[test]
    fn empty_index_returns_nothing() {
        let idx = EmbeddingIndex::new(64);
        let q = HashedEmbedding::new(64).embed("anything");
        assert!(idx
            .topk_similar(LayerTag::FailureMode, NodeKind::FailurePattern, &q, 5)
            .is_empty());
    }

    #[test]
    fn exact_description_ranks_first_with_unit_similarity() {
        let p = HashedEmbedding::new(64);
        let descriptions = [
            ("fp-a", "price manipulation through reserve imbalance"),
            ("fp-b", "reentrancy during token callback"),
            ("fp-c", "signature replay across chains"),
        ];
        let mut idx = EmbeddingIndex::new(64);
        for (id, d) in &descriptions {
            idx.insert(
                fp(id),
                LayerTag::FailureMode,
                NodeKind::FailurePattern,
                &p.embed(d),
            );
        }
        let query = p.embed(descriptions[1].1);
        let got = idx.topk_similar(LayerTag::FailureMode, NodeKind::FailurePattern, &query, 3);
        // oracle: exhaustive cosine computation over the fixture
        let mut expected: Vec<(NodeId, f32)> = descriptions
            .iter()
            .map(|(id, d)| (fp(id), p.embed(d).cosine(&query)))
            .collect();
        expected.sort_by(|(ida, sa), (idb, sb)| {
            sb.partial_cmp(sa).unwrap().then_with(|| ida.cmp(idb))
        });
        assert_eq!(got, expected);
        assert_eq!(got[0].0, fp("fp-b"));
        assert!(got[0].1 > 0.999_999);
    }

    #[test]
    fn k_beyond_population_and_type_filter() {
        let p = HashedEmbedding::new(64);
        let mut idx = EmbeddingIndex::new(64);
        idx.insert(
            fp("fp-a"),
            LayerTag::FailureMode,
            NodeKind::FailurePattern,
            &p.embed("accounting mismatch"),
        );
        idx.insert(
            fp("rc-a"),
            LayerTag::FailureMode,
            NodeKind::RootCause,
            &p.embed("full transfer assumption"),
        );
        let q = p.embed("accounting");
        let got = idx.topk_similar(LayerTag::FailureMode, NodeKind::FailurePattern, &q, 10);
        assert_eq!(got.len(), 1, "kind filter applies before the dense scan");
        assert_eq!(got[0].0, fp("fp-a"));
        // filter matching nothing
        assert!(idx
            .topk_similar(LayerTag::ExploitPrimitive, NodeKind::Skeleton, &q, 10)
            .is_empty());
    }
}
