//! Typed graph store with admissibility enforcement and JSON persistence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::schema::{admissible, EdgeKind, Granularity, LayerTag, NodeKind, PrimitiveRole};

/// Opaque stable node identifier.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

/// A typed, layered knowledge-graph node.
///
/// The serialized record fields are part of the on-disk format contract:
/// `{id, layer, kind, granularity, role, description, provenance, embedding?}`.
/// `variant_of` and `specific` are optional annotations (omitted when unset):
/// fusion marks parallel variants with `variant_of`, and `specific`
/// distinguishes case-specific plans from generic behaviors on `Primitive`
/// nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HkgNode {
    #[serde(default)]
    pub id: NodeId,
    pub layer: LayerTag,
    pub kind: NodeKind,
    #[serde(default)]
    pub granularity: Granularity,
    #[serde(default)]
    pub role: PrimitiveRole,
    pub description: String,
    #[serde(default)]
    pub provenance: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_of: Option<NodeId>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub specific: bool,
}

impl HkgNode {
    pub fn new(kind: NodeKind, description: impl Into<String>) -> Self {
        HkgNode {
            id: NodeId::default(),
            layer: kind.layer(),
            kind,
            granularity: Granularity::NotApplicable,
            role: PrimitiveRole::NotApplicable,
            description: description.into(),
            provenance: BTreeSet::new(),
            embedding: None,
            variant_of: None,
            specific: false,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = NodeId::new(id);
        self
    }

    pub fn with_granularity(mut self, granularity: Granularity) -> Self {
        self.granularity = granularity;
        self
    }

    pub fn with_role(mut self, role: PrimitiveRole) -> Self {
        self.role = role;
        self
    }

    pub fn with_provenance(mut self, case: impl Into<String>) -> Self {
        self.provenance.insert(case.into());
        self
    }

    /// Content hash over (kind, normalized description). Used by fusion as an
    /// exact-duplicate fast path; never serialized.
    pub fn content_hash(&self) -> u64 {
        content_hash(self.kind, &self.description)
    }
}

/// Lowercased alphanumeric tokens joined by single spaces.
pub(crate) fn normalize_description(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_token = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            for l in c.to_lowercase() {
                out.push(l);
            }
            in_token = true;
        } else if in_token {
            out.push(' ');
            in_token = false;
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

pub(crate) fn content_hash(kind: NodeKind, description: &str) -> u64 {
    // FNV-1a, fixed here so hashes are stable across platforms and releases.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    };
    eat(format!("{kind:?}").as_bytes());
    eat(b"\x1f");
    eat(normalize_description(description).as_bytes());
    h
}

/// A typed directed edge.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct HkgEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
}

impl HkgEdge {
    pub fn new(src: impl Into<String>, kind: EdgeKind, dst: impl Into<String>) -> Self {
        HkgEdge {
            src: NodeId::new(src),
            dst: NodeId::new(dst),
            kind,
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid node: {0}")]
    InvalidKind(String),
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("missing endpoint {0}")]
    MissingEndpoint(NodeId),
    #[error("inadmissible edge {kind:?}: {src_kind:?} -> {dst_kind:?}")]
    InadmissibleEdge {
        kind: EdgeKind,
        src_kind: NodeKind,
        dst_kind: NodeKind,
    },
    #[error("self loop on {0}")]
    SelfLoop(NodeId),
    #[error("hierarchy violation: {0}")]
    HierarchyViolation(String),
    #[error("malformed graph document: {0}")]
    Malformed(String),
}

/// In-memory HKG store.
///
/// Reads take `&self` and mutations `&mut self`; the store itself spawns no
/// concurrency.
#[derive(Debug, Clone, Default)]
pub struct HkgGraph {
    nodes: BTreeMap<NodeId, HkgNode>,
    edges: BTreeSet<HkgEdge>,
    out_adj: BTreeMap<NodeId, BTreeSet<(EdgeKind, NodeId)>>,
    in_adj: BTreeMap<NodeId, BTreeSet<(EdgeKind, NodeId)>>,
    next_id: u64,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    nodes: Vec<HkgNode>,
    edges: Vec<HkgEdge>,
}

impl HkgGraph {
    pub fn new() -> Self {
        HkgGraph::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn node(&self, id: &NodeId) -> Option<&HkgNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &HkgNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &HkgEdge> {
        self.edges.iter()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    fn validate_node(node: &HkgNode) -> Result<(), StoreError> {
        if node.description.trim().is_empty() {
            return Err(StoreError::InvalidKind("empty description".into()));
        }
        if node.kind.layer() != node.layer {
            return Err(StoreError::InvalidKind(format!(
                "kind {:?} does not belong to layer {:?}",
                node.kind, node.layer
            )));
        }
        if node.granularity != Granularity::NotApplicable
            && node.layer != LayerTag::ContractSemantics
        {
            return Err(StoreError::InvalidKind(format!(
                "granularity {:?} outside contract semantics",
                node.granularity
            )));
        }
        if node.role != PrimitiveRole::NotApplicable && node.kind != NodeKind::Primitive {
            return Err(StoreError::InvalidKind(format!(
                "role {:?} on non-primitive node",
                node.role
            )));
        }
        Ok(())
    }

    /// Insert a node. An empty id gets a fresh opaque one; a provided id must
    /// be unused. The store does not deduplicate — that is fusion's job.
    pub fn add_node(&mut self, mut node: HkgNode) -> Result<NodeId, StoreError> {
        Self::validate_node(&node)?;
        if node.id.is_empty() {
            loop {
                self.next_id += 1;
                let candidate = NodeId::new(format!("n{:06}", self.next_id));
                if !self.nodes.contains_key(&candidate) {
                    node.id = candidate;
                    break;
                }
            }
        } else if self.nodes.contains_key(&node.id) {
            return Err(StoreError::DuplicateId(node.id));
        }
        let id = node.id.clone();
        self.nodes.insert(id.clone(), node);
        Ok(id)
    }

    pub fn node_mut(&mut self, id: &NodeId) -> Option<&mut HkgNode> {
        self.nodes.get_mut(id)
    }

    /// Insert an edge. Re-adding an existing (src, kind, dst) triple is a
    /// no-op; inadmissible or dangling edges are rejected. `subsume` and
    /// `implements` edges must keep the contract-semantics hierarchy a forest.
    pub fn add_edge(&mut self, edge: HkgEdge) -> Result<(), StoreError> {
        if edge.src == edge.dst {
            return Err(StoreError::SelfLoop(edge.src));
        }
        let src = self
            .nodes
            .get(&edge.src)
            .ok_or_else(|| StoreError::MissingEndpoint(edge.src.clone()))?;
        let dst = self
            .nodes
            .get(&edge.dst)
            .ok_or_else(|| StoreError::MissingEndpoint(edge.dst.clone()))?;
        if !admissible(
            edge.kind,
            src.kind,
            src.granularity,
            dst.kind,
            dst.granularity,
        ) {
            return Err(StoreError::InadmissibleEdge {
                kind: edge.kind,
                src_kind: src.kind,
                dst_kind: dst.kind,
            });
        }
        if self.edges.contains(&edge) {
            return Ok(());
        }
        if matches!(edge.kind, EdgeKind::Subsume | EdgeKind::Implements) {
            self.check_hierarchy(&edge)?;
        }
        self.out_adj
            .entry(edge.src.clone())
            .or_default()
            .insert((edge.kind, edge.dst.clone()));
        self.in_adj
            .entry(edge.dst.clone())
            .or_default()
            .insert((edge.kind, edge.src.clone()));
        self.edges.insert(edge);
        Ok(())
    }

    fn is_hierarchy(kind: EdgeKind) -> bool {
        matches!(kind, EdgeKind::Subsume | EdgeKind::Implements)
    }

    fn check_hierarchy(&self, edge: &HkgEdge) -> Result<(), StoreError> {
        let has_parent = self
            .in_adj
            .get(&edge.dst)
            .map(|set| set.iter().any(|(k, _)| Self::is_hierarchy(*k)))
            .unwrap_or(false);
        if has_parent {
            return Err(StoreError::HierarchyViolation(format!(
                "{} already has a subsume/implements parent",
                edge.dst
            )));
        }
        // would src become reachable from dst along hierarchy edges?
        let mut stack = vec![edge.dst.clone()];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == edge.src {
                return Err(StoreError::HierarchyViolation(format!(
                    "cycle through {}",
                    edge.src
                )));
            }
            if !seen.insert(n.clone()) {
                continue;
            }
            if let Some(outs) = self.out_adj.get(&n) {
                for (k, d) in outs {
                    if Self::is_hierarchy(*k) {
                        stack.push(d.clone());
                    }
                }
            }
        }
        Ok(())
    }

    /// Incident edges in `direction` whose kind is in `kinds` (empty filter =
    /// all kinds), with the adjacent node. Deterministic order: edge kind,
    /// then adjacent node id.
    pub fn neighbors(
        &self,
        id: &NodeId,
        direction: Direction,
        kinds: &[EdgeKind],
    ) -> Result<Vec<(HkgEdge, &HkgNode)>, StoreError> {
        if !self.nodes.contains_key(id) {
            return Err(StoreError::MissingEndpoint(id.clone()));
        }
        let adj = match direction {
            Direction::Out => self.out_adj.get(id),
            Direction::In => self.in_adj.get(id),
        };
        let mut out = Vec::new();
        if let Some(set) = adj {
            // (kind, other) pairs are already sorted by the BTreeSet order
            for (kind, other) in set {
                if !kinds.is_empty() && !kinds.contains(kind) {
                    continue;
                }
                let edge = match direction {
                    Direction::Out => HkgEdge {
                        src: id.clone(),
                        dst: other.clone(),
                        kind: *kind,
                    },
                    Direction::In => HkgEdge {
                        src: other.clone(),
                        dst: id.clone(),
                        kind: *kind,
                    },
                };
                out.push((edge, &self.nodes[other]));
            }
        }
        Ok(out)
    }

    /// Induced subgraph over `ids`: the named nodes plus every edge with both
    /// endpoints in the set.
    pub fn subgraph(&self, ids: &[NodeId]) -> Result<HkgGraph, StoreError> {
        let mut g = HkgGraph::new();
        let set: BTreeSet<&NodeId> = ids.iter().collect();
        for id in &set {
            let node = self
                .nodes
                .get(*id)
                .ok_or_else(|| StoreError::MissingEndpoint((*id).clone()))?;
            g.add_node(node.clone())?;
        }
        for edge in &self.edges {
            if set.contains(&edge.src) && set.contains(&edge.dst) {
                g.add_edge(edge.clone())?;
            }
        }
        g.next_id = self.next_id;
        Ok(g)
    }

    /// Full-scan schema check; returns a description of every violation.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for node in self.nodes.values() {
            if let Err(e) = Self::validate_node(node) {
                problems.push(format!("node {}: {e}", node.id));
            }
        }
        for edge in &self.edges {
            match (self.nodes.get(&edge.src), self.nodes.get(&edge.dst)) {
                (Some(s), Some(d)) => {
                    if !admissible(edge.kind, s.kind, s.granularity, d.kind, d.granularity) {
                        problems.push(format!(
                            "edge {} -{:?}-> {} inadmissible",
                            edge.src, edge.kind, edge.dst
                        ));
                    }
                }
                _ => problems.push(format!(
                    "edge {} -{:?}-> {} dangling",
                    edge.src, edge.kind, edge.dst
                )),
            }
        }
        problems
    }

    pub fn to_json_string(&self) -> String {
        let doc = GraphDoc {
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<HkgGraph, StoreError> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| StoreError::Malformed(e.to_string()))?;
        let mut g = HkgGraph::new();
        for node in doc.nodes {
            if node.id.is_empty() {
                return Err(StoreError::Malformed("node without id".into()));
            }
            g.add_node(node)?;
        }
        for edge in doc.edges {
            g.add_edge(edge)?;
        }
        Ok(g)
    }

    /// Structure signature that is invariant under id renaming: node records
    /// keyed by (content hash, provenance), edges by endpoint hashes. Two
    /// stores with equal signatures are isomorphic up to node ids.
    pub fn canonical_signature(&self) -> String {
        let mut node_keys: Vec<String> = self
            .nodes
            .values()
            .map(|n| {
                format!(
                    "{:?}/{:?}/{:?}/{:016x}/{:?}/{}",
                    n.layer,
                    n.kind,
                    n.granularity,
                    n.content_hash(),
                    n.role,
                    n.provenance.iter().cloned().collect::<Vec<_>>().join("+"),
                )
            })
            .collect();
        node_keys.sort();
        let mut edge_keys: Vec<String> = self
            .edges
            .iter()
            .map(|e| {
                let s = &self.nodes[&e.src];
                let d = &self.nodes[&e.dst];
                format!(
                    "{:016x}-{:?}->{:016x}",
                    s.content_hash(),
                    e.kind,
                    d.content_hash()
                )
            })
            .collect();
        edge_keys.sort();
        format!("nodes:{}\nedges:{}", node_keys.join("|"), edge_keys.join("|"))
    }
}

/// Direction of incident-edge enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::fee_on_transfer_fixture;

    fn protocol(desc: &str) -> HkgNode {
        HkgNode::new(NodeKind::Protocol, desc).with_granularity(Granularity::PrimaryCategory)
    }

    #[test]
    fn add_node_and_retrieve() {
        let mut g = HkgGraph::new();
        let id = g
            .add_node(protocol("token wrapping protocol").with_id("TokenWrapping"))
            .unwrap();
        assert_eq!(id, NodeId::new("TokenWrapping"));
        assert_eq!(
            g.node(&id).unwrap().description,
            "token wrapping protocol"
        );
    }

    #[test]
    fn empty_description_is_invalid() {
        let mut g = HkgGraph::new();
        let err = g.add_node(protocol("  ")).unwrap_err();
        assert!(matches!(err, StoreError::InvalidKind(_)));
    }

    #[test]
    fn layer_kind_mismatch_is_invalid() {
        let mut g = HkgGraph::new();
        let mut node = HkgNode::new(NodeKind::FailurePattern, "pattern");
        node.layer = LayerTag::ContractSemantics;
        assert!(matches!(
            g.add_node(node).unwrap_err(),
            StoreError::InvalidKind(_)
        ));
        // granularity outside contract semantics
        let node =
            HkgNode::new(NodeKind::RootCause, "cause").with_granularity(Granularity::SubCategory);
        assert!(matches!(
            g.add_node(node).unwrap_err(),
            StoreError::InvalidKind(_)
        ));
        // role on a non-primitive node
        let node =
            HkgNode::new(NodeKind::Skeleton, "scaffold").with_role(PrimitiveRole::Setup);
        assert!(matches!(
            g.add_node(node).unwrap_err(),
            StoreError::InvalidKind(_)
        ));
    }

    #[test]
    fn same_record_twice_with_distinct_ids_yields_two_nodes() {
        // dedup is fusion's job, not the store's
        let mut g = HkgGraph::new();
        g.add_node(protocol("amm protocol").with_id("a")).unwrap();
        g.add_node(protocol("amm protocol").with_id("b")).unwrap();
        assert_eq!(g.node_count(), 2);
        // ...but a colliding id is rejected
        assert!(matches!(
            g.add_node(protocol("amm protocol").with_id("a")).unwrap_err(),
            StoreError::DuplicateId(_)
        ));
    }

    #[test]
    fn assigned_ids_are_fresh() {
        let mut g = HkgGraph::new();
        let a = g.add_node(protocol("one")).unwrap();
        let b = g.add_node(protocol("two")).unwrap();
        assert_ne!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn admissible_edges_accepted_inadmissible_rejected() {
        let mut g = HkgGraph::new();
        g.add_node(protocol("vault protocol").with_id("prot")).unwrap();
        g.add_node(
            HkgNode::new(NodeKind::AccessControl, "owner only guard")
                .with_id("acc")
                .with_granularity(Granularity::PrimaryCategory),
        )
        .unwrap();
        g.add_node(HkgNode::new(NodeKind::FailurePattern, "price manipulation").with_id("fp"))
            .unwrap();
        g.add_node(HkgNode::new(NodeKind::RootCause, "stale oracle").with_id("rc"))
            .unwrap();

        g.add_edge(HkgEdge::new("prot", EdgeKind::Enforces, "acc")).unwrap();
        g.add_edge(HkgEdge::new("fp", EdgeKind::CausedBy, "rc")).unwrap();

        // leads_to targets invariant violations only
        let err = g
            .add_edge(HkgEdge::new("rc", EdgeKind::LeadsTo, "prot"))
            .unwrap_err();
        assert!(matches!(err, StoreError::InadmissibleEdge { .. }));

        let err = g
            .add_edge(HkgEdge::new("fp", EdgeKind::CausedBy, "ghost"))
            .unwrap_err();
        assert!(matches!(err, StoreError::MissingEndpoint(_)));

        // duplicate triple is a silent no-op
        let edges_before = g.edge_count();
        g.add_edge(HkgEdge::new("fp", EdgeKind::CausedBy, "rc")).unwrap();
        assert_eq!(g.edge_count(), edges_before);

        assert!(matches!(
            g.add_edge(HkgEdge::new("fp", EdgeKind::CausedBy, "fp")).unwrap_err(),
            StoreError::SelfLoop(_)
        ));
    }

    #[test]
    fn hierarchy_stays_a_forest() {
        let mut g = HkgGraph::new();
        for (id, gran) in [
            ("p1", Granularity::PrimaryCategory),
            ("p2", Granularity::PrimaryCategory),
            ("s1", Granularity::SubCategory),
        ] {
            g.add_node(
                HkgNode::new(NodeKind::Protocol, format!("node {id}")).with_id(id).with_granularity(gran),
            )
            .unwrap();
        }
        g.add_edge(HkgEdge::new("p1", EdgeKind::Subsume, "s1")).unwrap();
        // a second subsume parent is rejected
        assert!(matches!(
            g.add_edge(HkgEdge::new("p2", EdgeKind::Subsume, "s1")).unwrap_err(),
            StoreError::HierarchyViolation(_)
        ));
    }

    #[test]
    fn neighbors_match_fixture_table() {
        let (g, _, _) = fee_on_transfer_fixture();
        let got = g
            .neighbors(
                &NodeId::new("FullTransferAssumption"),
                Direction::Out,
                &[EdgeKind::LeadsTo],
            )
            .unwrap();
        let ids: Vec<&str> = got.iter().map(|(_, n)| n.id.as_str()).collect();
        assert_eq!(ids, vec!["CollateralConsistency", "Redeemability"]);
    }

    #[test]
    fn neighbors_edge_cases() {
        let mut g = HkgGraph::new();
        g.add_node(protocol("isolated").with_id("iso")).unwrap();
        assert!(g
            .neighbors(&NodeId::new("iso"), Direction::Out, &[])
            .unwrap()
            .is_empty());
        assert!(matches!(
            g.neighbors(&NodeId::new("nope"), Direction::Out, &[]).unwrap_err(),
            StoreError::MissingEndpoint(_)
        ));

        let (g, _, _) = fee_on_transfer_fixture();
        // kind filter matching nothing
        assert!(g
            .neighbors(
                &NodeId::new("FullTransferAssumption"),
                Direction::Out,
                &[EdgeKind::Adopts],
            )
            .unwrap()
            .is_empty());
    }

    #[test]
    fn out_and_in_neighbors_cover_all_incident_edges() {
        let (g, _, _) = fee_on_transfer_fixture();
        for id in g.node_ids() {
            let mut incident: Vec<HkgEdge> = g
                .neighbors(id, Direction::Out, &[])
                .unwrap()
                .into_iter()
                .chain(g.neighbors(id, Direction::In, &[]).unwrap())
                .map(|(e, _)| e)
                .collect();
            incident.sort();
            incident.dedup();
            let mut expected: Vec<HkgEdge> = g
                .edges()
                .filter(|e| e.src == *id || e.dst == *id)
                .cloned()
                .collect();
            expected.sort();
            assert_eq!(incident, expected, "incident mismatch at {id}");
        }
    }

    #[test]
    fn induced_subgraph() {
        let (g, _, _) = fee_on_transfer_fixture();
        // full node set -> isomorphic to input
        let all: Vec<NodeId> = g.node_ids().cloned().collect();
        let full = g.subgraph(&all).unwrap();
        assert_eq!(full.canonical_signature(), g.canonical_signature());

        // empty set -> empty graph
        let empty = g.subgraph(&[]).unwrap();
        assert_eq!(empty.node_count(), 0);
        assert_eq!(empty.edge_count(), 0);

        // two connected nodes keep exactly their connecting edges
        // (oracle: brute-force filter over the fixture edge list)
        let pair = [
            NodeId::new("AccountingMismatch"),
            NodeId::new("FullTransferAssumption"),
        ];
        let sub = g.subgraph(&pair).unwrap();
        let expected: Vec<&HkgEdge> = g
            .edges()
            .filter(|e| pair.contains(&e.src) && pair.contains(&e.dst))
            .collect();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edge_count(), expected.len());
        for e in expected {
            assert!(sub.edges().any(|se| se == e));
        }
        assert!(sub.validate().is_empty(), "subgraph conformant by construction");

        assert!(matches!(
            g.subgraph(&[NodeId::new("missing")]).unwrap_err(),
            StoreError::MissingEndpoint(_)
        ));
    }

    #[test]
    fn json_round_trip_is_identity() {
        let (g, _, _) = fee_on_transfer_fixture();
        let text = g.to_json_string();
        let restored = HkgGraph::from_json_str(&text).unwrap();
        let nodes_a: Vec<&HkgNode> = g.nodes().collect();
        let nodes_b: Vec<&HkgNode> = restored.nodes().collect();
        assert_eq!(nodes_a, nodes_b);
        let edges_a: Vec<&HkgEdge> = g.edges().collect();
        let edges_b: Vec<&HkgEdge> = restored.edges().collect();
        assert_eq!(edges_a, edges_b);
    }

    #[test]
    fn node_record_field_names_are_the_format_contract() {
        let node = HkgNode::new(NodeKind::FailurePattern, "accounting mismatch")
            .with_id("fp")
            .with_provenance("case-1");
        let value = serde_json::to_value(&node).unwrap();
        let mut keys: Vec<&str> =
            value.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            vec!["description", "granularity", "id", "kind", "layer", "provenance", "role"]
        );
        // embedding joins the record only when cached
        let mut node = node;
        node.embedding = Some(vec![0.5, 0.5]);
        let value = serde_json::to_value(&node).unwrap();
        assert!(value.as_object().unwrap().contains_key("embedding"));
    }

    #[test]
    fn full_scan_admissibility_holds_on_fixture() {
        let (g, _, _) = fee_on_transfer_fixture();
        assert!(g.validate().is_empty());
    }
}
