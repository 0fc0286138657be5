//! Node/edge type vocabulary and the fixed admissibility table.

use serde::{Deserialize, Serialize};

/// Semantic layer a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayerTag {
    ContractSemantics,
    FailureMode,
    ExploitPrimitive,
}

impl LayerTag {
    pub const ALL: [LayerTag; 3] = [
        LayerTag::ContractSemantics,
        LayerTag::FailureMode,
        LayerTag::ExploitPrimitive,
    ];
}

/// Layer-scoped node kind.
///
/// Contract semantics: `Protocol`, `AccessControl`, `EconomicModel`,
/// `Dependency`. Failure mode: `FailurePattern`, `Condition`, `Impact`,
/// `RootCause`, `InvariantViolation`. Exploit primitive: `Skeleton`
/// (the PoC framework scaffold), `Primitive` (a reusable exploit behavior or
/// a case-specific plan, distinguished by [`HkgNode::specific`]), `Example`.
///
/// [`HkgNode::specific`]: super::HkgNode
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    // contract semantics
    Protocol,
    AccessControl,
    EconomicModel,
    Dependency,
    // failure mode
    FailurePattern,
    Condition,
    Impact,
    RootCause,
    InvariantViolation,
    // exploit primitive
    Skeleton,
    Primitive,
    Example,
}

impl NodeKind {
    /// The layer this kind is valid in.
    pub fn layer(self) -> LayerTag {
        use NodeKind::*;
        match self {
            Protocol | AccessControl | EconomicModel | Dependency => LayerTag::ContractSemantics,
            FailurePattern | Condition | Impact | RootCause | InvariantViolation => {
                LayerTag::FailureMode
            }
            Skeleton | Primitive | Example => LayerTag::ExploitPrimitive,
        }
    }
}

/// Hierarchical position of a contract-semantics node.
///
/// Only contract-semantics nodes use values other than `NotApplicable`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub enum Granularity {
    PrimaryCategory,
    SubCategory,
    ImplementLogic,
    #[default]
    NotApplicable,
}

/// Semantic role of an exploit primitive within a skeleton.
///
/// Non-`NotApplicable` only on `Primitive` nodes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub enum PrimitiveRole {
    Setup,
    EnvironmentManipulation,
    ExploitationAndAmplification,
    ArbitrageAndExit,
    #[default]
    NotApplicable,
}

/// Typed relation between two nodes.
///
/// The declaration order doubles as the deterministic sort order used by
/// neighbor enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Enforces,
    Adopts,
    DependsOn,
    Subsume,
    Implements,
    CausedBy,
    Needs,
    CanCause,
    LeadsTo,
    StartAt,
    Next,
    IllustratedBy,
    RelatedExploit,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 13] = [
        EdgeKind::Enforces,
        EdgeKind::Adopts,
        EdgeKind::DependsOn,
        EdgeKind::Subsume,
        EdgeKind::Implements,
        EdgeKind::CausedBy,
        EdgeKind::Needs,
        EdgeKind::CanCause,
        EdgeKind::LeadsTo,
        EdgeKind::StartAt,
        EdgeKind::Next,
        EdgeKind::IllustratedBy,
        EdgeKind::RelatedExploit,
    ];
}

/// One admissible (source, destination) pattern for an edge kind.
///
/// `None` granularity means "any".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndpointRule {
    pub src_kind: Option<NodeKind>,
    pub src_layer: Option<LayerTag>,
    pub src_granularity: Option<Granularity>,
    pub dst_kind: Option<NodeKind>,
    pub dst_granularity: Option<Granularity>,
    /// Source and destination must share the same node kind (the
    /// `subsume`/`implements` hierarchy stays within one CS kind).
    pub same_kind: bool,
}

const fn rule(src: NodeKind, dst: NodeKind) -> EndpointRule {
    EndpointRule {
        src_kind: Some(src),
        src_layer: None,
        src_granularity: None,
        dst_kind: Some(dst),
        dst_granularity: None,
        same_kind: false,
    }
}

static ENFORCES: [EndpointRule; 1] = [rule(NodeKind::Protocol, NodeKind::AccessControl)];
static ADOPTS: [EndpointRule; 1] = [rule(NodeKind::Protocol, NodeKind::EconomicModel)];
static DEPENDS_ON: [EndpointRule; 1] = [rule(NodeKind::Protocol, NodeKind::Dependency)];
static SUBSUME: [EndpointRule; 1] = [EndpointRule {
    src_kind: None,
    src_layer: Some(LayerTag::ContractSemantics),
    src_granularity: Some(Granularity::PrimaryCategory),
    dst_kind: None,
    dst_granularity: Some(Granularity::SubCategory),
    same_kind: true,
}];
static IMPLEMENTS: [EndpointRule; 1] = [EndpointRule {
    src_kind: None,
    src_layer: Some(LayerTag::ContractSemantics),
    src_granularity: Some(Granularity::SubCategory),
    dst_kind: None,
    dst_granularity: Some(Granularity::ImplementLogic),
    same_kind: true,
}];
static CAUSED_BY: [EndpointRule; 1] = [rule(NodeKind::FailurePattern, NodeKind::RootCause)];
static NEEDS: [EndpointRule; 1] = [rule(NodeKind::FailurePattern, NodeKind::Condition)];
static CAN_CAUSE: [EndpointRule; 1] = [rule(NodeKind::FailurePattern, NodeKind::Impact)];
static LEADS_TO: [EndpointRule; 1] = [rule(NodeKind::RootCause, NodeKind::InvariantViolation)];
static START_AT: [EndpointRule; 1] = [rule(NodeKind::Skeleton, NodeKind::Primitive)];
static NEXT: [EndpointRule; 1] = [rule(NodeKind::Primitive, NodeKind::Primitive)];
static ILLUSTRATED_BY: [EndpointRule; 1] = [rule(NodeKind::Skeleton, NodeKind::Example)];
// One edge name, two admissibility rules: any CS node may be implicated in a
// failure pattern, and a root cause links to the exploit-primitive entry
// points.
static RELATED_EXPLOIT: [EndpointRule; 3] = [
    EndpointRule {
        src_kind: None,
        src_layer: Some(LayerTag::ContractSemantics),
        src_granularity: None,
        dst_kind: Some(NodeKind::FailurePattern),
        dst_granularity: None,
        same_kind: false,
    },
    rule(NodeKind::RootCause, NodeKind::Skeleton),
    rule(NodeKind::RootCause, NodeKind::Primitive),
];

/// Admissible endpoint patterns for an edge kind. Total over [`EdgeKind`]
/// and fixed at build time.
pub fn allowed_pairs(kind: EdgeKind) -> &'static [EndpointRule] {
    match kind {
        EdgeKind::Enforces => &ENFORCES,
        EdgeKind::Adopts => &ADOPTS,
        EdgeKind::DependsOn => &DEPENDS_ON,
        EdgeKind::Subsume => &SUBSUME,
        EdgeKind::Implements => &IMPLEMENTS,
        EdgeKind::CausedBy => &CAUSED_BY,
        EdgeKind::Needs => &NEEDS,
        EdgeKind::CanCause => &CAN_CAUSE,
        EdgeKind::LeadsTo => &LEADS_TO,
        EdgeKind::StartAt => &START_AT,
        EdgeKind::Next => &NEXT,
        EdgeKind::IllustratedBy => &ILLUSTRATED_BY,
        EdgeKind::RelatedExploit => &RELATED_EXPLOIT,
    }
}

/// Whether an edge of `kind` may connect a source of `(src_kind, src_gran)`
/// to a destination of `(dst_kind, dst_gran)`.
pub fn admissible(
    kind: EdgeKind,
    src_kind: NodeKind,
    src_gran: Granularity,
    dst_kind: NodeKind,
    dst_gran: Granularity,
) -> bool {
    allowed_pairs(kind).iter().any(|r| {
        r.src_kind.map_or(true, |k| k == src_kind)
            && r.src_layer.map_or(true, |l| l == src_kind.layer())
            && r.src_granularity.map_or(true, |g| g == src_gran)
            && r.dst_kind.map_or(true, |k| k == dst_kind)
            && r.dst_granularity.map_or(true, |g| g == dst_gran)
            && (!r.same_kind || src_kind == dst_kind)
    })
}
