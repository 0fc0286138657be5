//! Shared test fixtures.
//!
//! The main fixture mirrors the fee-on-transfer portal case: a token-wrapping
//! protocol chain in the contract-semantics layer, the accounting-mismatch
//! failure mode behind it, and a deposit-drain exploit skeleton, plus an
//! unrelated lending-market distractor for retrieval tests.

use crate::fusion::{EmbeddingIndex, EmbeddingProvider, HashedEmbedding};
use crate::ontology::{
    EdgeKind, Granularity, HkgEdge, HkgGraph, HkgNode, NodeKind, PrimitiveRole,
};

pub(crate) const FIXTURE_DIM: usize = 128;

pub(crate) fn fee_on_transfer_fixture() -> (HkgGraph, EmbeddingIndex, HashedEmbedding) {
    let provider = HashedEmbedding::new(FIXTURE_DIM);
    let mut graph = HkgGraph::new();
    let mut index = EmbeddingIndex::new(FIXTURE_DIM);

    let mut add = |node: HkgNode| {
        let layer = node.layer;
        let kind = node.kind;
        let vector = provider.embed(&node.description);
        let mut node = node;
        node.embedding = Some(vector.0.clone());
        let id = graph.add_node(node).expect("fixture node");
        index.insert(id, layer, kind, &vector);
    };

    let cs = |id: &str, kind: NodeKind, gran: Granularity, desc: &str| {
        HkgNode::new(kind, desc)
            .with_id(id)
            .with_granularity(gran)
            .with_provenance("case-merge-token-portal")
    };
    let fm = |id: &str, kind: NodeKind, desc: &str| {
        HkgNode::new(kind, desc)
            .with_id(id)
            .with_provenance("case-merge-token-portal")
    };
    let ep = |id: &str, kind: NodeKind, role: PrimitiveRole, desc: &str| {
        HkgNode::new(kind, desc)
            .with_id(id)
            .with_role(role)
            .with_provenance("case-merge-token-portal")
    };

    use Granularity::{ImplementLogic, PrimaryCategory, SubCategory};
    use NodeKind::*;
    use PrimitiveRole::{ArbitrageAndExit, ExploitationAndAmplification, Setup};

    // contract semantics
    add(cs(
        "TokenWrapping",
        Protocol,
        PrimaryCategory,
        "token wrapping protocol converting deposited source tokens into synthetic wrapped tokens",
    ));
    add(cs(
        "Portal",
        Protocol,
        SubCategory,
        "portal contract mediating deposit and withdrawal between a source token and a merge token",
    ));
    add(cs(
        "DepositMint",
        Protocol,
        ImplementLogic,
        "deposit handler that mints merge tokens equal to the declared deposit amount",
    ));
    add(cs(
        "AssetBacking",
        EconomicModel,
        PrimaryCategory,
        "economic model backing every minted token with reserved collateral",
    ));
    add(cs(
        "DeterministicMinting",
        EconomicModel,
        SubCategory,
        "deterministic minting rule tying minted supply to deposited amounts",
    ));
    add(cs(
        "BalanceDeltaBased",
        EconomicModel,
        ImplementLogic,
        "mint amount derived from declared transfer amount instead of measured balance delta",
    ));
    add(cs(
        "ERC20Token",
        Dependency,
        PrimaryCategory,
        "external erc20 token dependency",
    ));
    add(cs(
        "NonStandardERC20",
        Dependency,
        SubCategory,
        "non standard erc20 token with unconventional transfer behavior",
    ));
    add(cs(
        "FeeOnTransfer",
        Dependency,
        ImplementLogic,
        "fee on transfer token deducting a percentage fee from every transfer",
    ));
    // distractor for seed retrieval
    add(cs(
        "LendingMarket",
        Protocol,
        PrimaryCategory,
        "collateralized lending market with interest accrual and liquidation auctions",
    ));

    // failure mode
    add(fm(
        "ERC20Incompatibility",
        FailurePattern,
        "erc20 incompatibility where protocol accounting ignores non standard token transfer behavior",
    ));
    add(fm(
        "AccountingMismatch",
        FailurePattern,
        "accounting mismatch between recorded balances and actual token amounts received",
    ));
    add(fm(
        "FullTransferAssumption",
        RootCause,
        "assumes the full transfer amount is always received by the recipient",
    ));
    add(fm(
        "CollateralConsistency",
        InvariantViolation,
        "collateral consistency invariant that minted supply is fully backed",
    ));
    add(fm(
        "Redeemability",
        InvariantViolation,
        "redeemability invariant that every holder can redeem the underlying",
    ));
    add(fm(
        "OverMinting",
        Impact,
        "over minting of synthetic tokens beyond deposited collateral",
    ));
    add(fm(
        "DoS",
        Impact,
        "denial of service on withdrawals once reserves are insufficient",
    ));

    // exploit primitive
    add(ep(
        "DepositDrainSkeleton",
        Skeleton,
        PrimitiveRole::NotApplicable,
        "poc scaffold repeatedly depositing a fee on transfer token and draining the over minted reserve",
    ));
    add(ep(
        "TokenDeployment",
        Primitive,
        Setup,
        "deploy or acquire the fee charging token used by the attack",
    ));
    add(ep(
        "TokenRegistration",
        Primitive,
        Setup,
        "register the token with the victim portal",
    ));
    add(ep(
        "RepeatedDeposits",
        Primitive,
        ExploitationAndAmplification,
        "repeatedly deposit to accumulate over minted synthetic balance",
    ));
    add(ep(
        "RepeatedWithdrawals",
        Primitive,
        ArbitrageAndExit,
        "withdraw the over minted balance draining the reserve",
    ));
    add(ep(
        "ZkLinkPortalExample",
        Example,
        PrimitiveRole::NotApplicable,
        "example exploit walkthrough for a merge token portal",
    ));

    let edges = [
        ("TokenWrapping", EdgeKind::Subsume, "Portal"),
        ("Portal", EdgeKind::Implements, "DepositMint"),
        ("AssetBacking", EdgeKind::Subsume, "DeterministicMinting"),
        ("DeterministicMinting", EdgeKind::Implements, "BalanceDeltaBased"),
        ("ERC20Token", EdgeKind::Subsume, "NonStandardERC20"),
        ("NonStandardERC20", EdgeKind::Implements, "FeeOnTransfer"),
        ("TokenWrapping", EdgeKind::Adopts, "AssetBacking"),
        ("TokenWrapping", EdgeKind::DependsOn, "ERC20Token"),
        ("ERC20Incompatibility", EdgeKind::CausedBy, "FullTransferAssumption"),
        ("AccountingMismatch", EdgeKind::CausedBy, "FullTransferAssumption"),
        ("AccountingMismatch", EdgeKind::CanCause, "OverMinting"),
        ("ERC20Incompatibility", EdgeKind::CanCause, "DoS"),
        ("FullTransferAssumption", EdgeKind::LeadsTo, "CollateralConsistency"),
        ("FullTransferAssumption", EdgeKind::LeadsTo, "Redeemability"),
        ("DepositDrainSkeleton", EdgeKind::StartAt, "TokenDeployment"),
        ("TokenDeployment", EdgeKind::Next, "TokenRegistration"),
        ("TokenRegistration", EdgeKind::Next, "RepeatedDeposits"),
        ("RepeatedDeposits", EdgeKind::Next, "RepeatedWithdrawals"),
        ("DepositDrainSkeleton", EdgeKind::IllustratedBy, "ZkLinkPortalExample"),
        ("FeeOnTransfer", EdgeKind::RelatedExploit, "ERC20Incompatibility"),
        ("DepositMint", EdgeKind::RelatedExploit, "AccountingMismatch"),
        ("BalanceDeltaBased", EdgeKind::RelatedExploit, "AccountingMismatch"),
        ("FullTransferAssumption", EdgeKind::RelatedExploit, "DepositDrainSkeleton"),
    ];
    for (src, kind, dst) in edges {
        graph
            .add_edge(HkgEdge::new(src, kind, dst))
            .expect("fixture edge");
    }

    (graph, index, provider)
}

/// Contract summary a frontend pass would produce for the portal target.
pub(crate) fn portal_summary() -> String {
    "portal contract that wraps deposits of an underlying erc20 source token and mints \
     synthetic merge tokens for the declared amount, burning them on withdrawal to redeem \
     the underlying"
        .to_string()
}
