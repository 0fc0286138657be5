//! Property tests over generated inputs.

use num_bigint::BigUint;
use proptest::prelude::*;

use evopoc::fusion::{EmbeddingProvider, HashedEmbedding};
use evopoc::ontology::{
    EdgeKind, Granularity, HkgEdge, HkgGraph, HkgNode, NodeKind, PrimitiveRole,
};
use evopoc::profitability::swap_out;

fn arbitrary_kind() -> impl Strategy<Value = NodeKind> {
    prop_oneof![
        Just(NodeKind::Protocol),
        Just(NodeKind::AccessControl),
        Just(NodeKind::EconomicModel),
        Just(NodeKind::Dependency),
        Just(NodeKind::FailurePattern),
        Just(NodeKind::Condition),
        Just(NodeKind::Impact),
        Just(NodeKind::RootCause),
        Just(NodeKind::InvariantViolation),
        Just(NodeKind::Skeleton),
        Just(NodeKind::Primitive),
        Just(NodeKind::Example),
    ]
}

fn arbitrary_node(idx: usize) -> impl Strategy<Value = HkgNode> {
    (arbitrary_kind(), "[a-z]{3,20}( [a-z]{3,12}){0,4}").prop_map(move |(kind, description)| {
        let mut node = HkgNode::new(kind, description)
            .with_id(format!("n{idx}"))
            .with_provenance("prop-case");
        if kind.layer() == evopoc::ontology::LayerTag::ContractSemantics {
            node.granularity = Granularity::SubCategory;
        }
        if kind == NodeKind::Primitive {
            node.role = PrimitiveRole::Setup;
        }
        node
    })
}

proptest! {
    /// serialize ∘ deserialize is the identity on (nodes, edges).
    #[test]
    fn graph_json_round_trip(nodes in prop::collection::vec(arbitrary_node(0), 1..8)) {
        let mut graph = HkgGraph::new();
        for (i, mut node) in nodes.into_iter().enumerate() {
            node.id = evopoc::ontology::NodeId::new(format!("n{i}"));
            graph.add_node(node).unwrap();
        }
        // connect what the schema admits
        let ids: Vec<_> = graph.node_ids().cloned().collect();
        for a in &ids {
            for b in &ids {
                if a == b {
                    continue;
                }
                for kind in EdgeKind::ALL {
                    let _ = graph.add_edge(HkgEdge { src: a.clone(), dst: b.clone(), kind });
                }
            }
        }
        let restored = HkgGraph::from_json_str(&graph.to_json_string()).unwrap();
        prop_assert_eq!(
            graph.nodes().collect::<Vec<_>>(),
            restored.nodes().collect::<Vec<_>>()
        );
        prop_assert_eq!(
            graph.edges().collect::<Vec<_>>(),
            restored.edges().collect::<Vec<_>>()
        );
        prop_assert!(restored.validate().is_empty());
    }

    /// swap output is monotone in the input and strictly below the output
    /// reserve.
    #[test]
    fn swap_out_monotone_and_bounded(
        x1 in 0u128..u64::MAX as u128,
        dx in 0u128..u64::MAX as u128,
        r_in in 1u128..u64::MAX as u128,
        r_out in 1u128..u64::MAX as u128,
        fee in 1u32..=1_000_000,
    ) {
        let x1 = BigUint::from(x1);
        let x2 = &x1 + BigUint::from(dx);
        let r_in = BigUint::from(r_in);
        let r_out = BigUint::from(r_out);
        let a = swap_out(&x1, &r_in, &r_out, fee).unwrap();
        let b = swap_out(&x2, &r_in, &r_out, fee).unwrap();
        prop_assert!(a <= b, "monotone nondecreasing");
        prop_assert!(b < r_out, "bounded by the output reserve");
    }

    /// identical text embeds identically; nonzero embeddings are unit length.
    #[test]
    fn embedding_determinism_and_norm(text in ".{0,80}") {
        let provider = HashedEmbedding::new(64);
        let a = provider.embed(&text);
        let b = provider.embed(&text);
        prop_assert_eq!(&a.0, &b.0);
        if !a.is_zero() {
            let norm: f64 = a.0.iter().map(|x| f64::from(*x) * f64::from(*x)).sum();
            prop_assert!((norm.sqrt() - 1.0).abs() < 1e-5);
        }
    }

    /// the fee split conserves the transfer amount exactly.
    #[test]
    fn fee_split_conserves_amount(amount in 0u128..u64::MAX as u128, rate in 0u32..=10_000, burn_frac in 0u32..=100) {
        use evopoc::profitability::{apply, AssetOp, AssetState, FeeModel, SimConfig};
        let burn = rate * burn_frac / 100;
        let amount = BigUint::from(amount);
        let mut state = AssetState::default();
        state.credit("from", "TOK", &amount);
        let mut flash = Default::default();
        apply(
            &mut state,
            &AssetOp::Transfer {
                token: "TOK".into(),
                from: "from".into(),
                to: "to".into(),
                amount: amount.clone(),
                fee: Some(FeeModel {
                    rate_bps: rate,
                    burn_bps: burn,
                    retained_bps: rate - burn,
                    retention_holder: "holder".into(),
                }),
            },
            &SimConfig::default(),
            &mut flash,
        ).unwrap();
        let bps = BigUint::from(10_000u32);
        let expected_burn = &amount * BigUint::from(burn) / &bps;
        // delivered + retained = amount - burned, exactly
        let delivered = state.balance("to", "TOK");
        let retained = state.balance("holder", "TOK");
        prop_assert_eq!(delivered + retained + expected_burn, amount);
    }
}
