//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p evopoc-cli --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evopoc::frontend::{collect_predicates, parse_dir, traverse, TargetCategory, TargetOp};
use evopoc::fusion::{
    ingest_case, CaseSubgraph, CosineJudge, EmbeddingIndex, FusionConfig, HashedEmbedding,
};
use evopoc::ontology::{
    allowed_pairs, EdgeKind, Granularity, HkgEdge, HkgGraph, HkgNode, LayerTag, NodeKind,
    PrimitiveRole,
};
use evopoc::profitability::{simulate, AssetOp, AssetState, PoolState, ScenarioFile, SimConfig};
use evopoc::reachability::{
    check_sat, eval, BinOp, Expr, SatResult, Sort, SolverConfig, SymbolOwner, SymbolTable, Value,
};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn report(criterion: usize, name: &str, started: Instant) {
    println!(
        "[acceptance] criterion {criterion} ({name}): PASS in {:?}",
        started.elapsed()
    );
}

/// Criterion 1 — BEGO reachability golden: the collected predicates are
/// exactly {len(R)=len(S), len(S)=len(V), !txHashes[h]} and the solver
/// concretizes every signature array to length zero. Runtime < 1 s.
#[test]
fn criterion_1_bego_reachability_golden() {
    let started = Instant::now();
    let model = parse_dir(&fixtures().join("bego/contracts")).unwrap();
    let plan = evopoc::pipeline::ExploitPlan::from_json_str(
        &std::fs::read_to_string(fixtures().join("bego/plan.json")).unwrap(),
    )
    .unwrap();
    let target = TargetOp::with_sink(TargetCategory::StateModification, "_mint");
    let path = traverse(&model, "BEGO", "mint", &target, &Default::default()).unwrap();
    let (guards, symbols) = collect_predicates(&model, &path, &plan.steps[0].params).unwrap();

    let rendered: Vec<String> = guards.iter().map(|g| g.condition.render()).collect();
    assert_eq!(
        rendered,
        vec!["len(R) = len(S)", "len(S) = len(V)", "!txHashes[h]"],
        "exact predicate match"
    );

    let predicates: Vec<Expr> = guards.iter().map(|g| g.condition.clone()).collect();
    let result = check_sat(&predicates, &symbols, &SolverConfig::default()).unwrap();
    let SatResult::Sat(model_values) = result else {
        panic!("expected Sat, got {result:?}");
    };
    for len in ["len(R)", "len(S)", "len(V)"] {
        assert_eq!(model_values[len], Value::Int(BigUint::zero()), "{len} = 0");
    }
    assert!(started.elapsed() < Duration::from_secs(1), "runtime bound");
    report(1, "BEGO reachability golden", started);
}

/// Criterion 2 — BEGO profitability golden: the simulation reproduces the
/// step-table shape and the swap output equals the exact-rational oracle
/// value with zero tolerance. Runtime < 1 s.
#[test]
fn criterion_2_bego_profitability_golden() {
    let started = Instant::now();
    let r_bego: BigUint = "600000000000000000000000".parse().unwrap();
    let r_wbnb: BigUint = "2000000000000000000000".parse().unwrap();
    let m_raw: BigUint = "1000000000000000000000000000000".parse().unwrap();

    let mut initial = AssetState::default();
    initial.add_pool(PoolState {
        id: "BEGO/WBNB".into(),
        token0: "BEGO".into(),
        token1: "WBNB".into(),
        reserve0: r_bego.clone(),
        reserve1: r_wbnb.clone(),
        fee_ppm: 997_000,
        account: "pair".into(),
    });
    let script = vec![
        AssetOp::Mint {
            token: "BEGO".into(),
            to: "attacker".into(),
            amount: m_raw.clone(),
        },
        AssetOp::Approve {
            owner: "attacker".into(),
            spender: "Router".into(),
            token: "BEGO".into(),
            amount: m_raw.clone(),
        },
        AssetOp::SwapExactIn {
            pool: "BEGO/WBNB".into(),
            token_in: "BEGO".into(),
            amount_in: m_raw.clone(),
            recipient: "attacker".into(),
        },
    ];
    let outcome = simulate(
        &script,
        &initial,
        &["attacker".to_string()],
        "WBNB",
        &SimConfig::default(),
    )
    .unwrap();

    // independent oracle: out = floor(γ·x·R_W / (R_B·10^6 + γ·x))
    let gamma = BigRational::new(BigUint::from(997_000u32).into(), 1_000_000.into());
    let x = BigRational::from_integer(m_raw.clone().into());
    let exact = (&gamma * &x * BigRational::from_integer(r_wbnb.clone().into()))
        / (BigRational::from_integer(r_bego.clone().into()) + &gamma * &x);
    let out = exact.floor().to_integer().to_biguint().unwrap();
    assert!(out > BigUint::zero());

    let entries = &outcome.trace.entries;
    assert_eq!(entries[0].state.balance("attacker", "BEGO"), BigUint::zero());
    assert_eq!(entries[1].state.balance("attacker", "BEGO"), m_raw);
    assert_eq!(entries[3].state.balance("attacker", "BEGO"), BigUint::zero());
    assert_eq!(entries[3].state.balance("attacker", "WBNB"), out, "zero tolerance");
    let pool = &entries[3].state.pools["BEGO/WBNB"];
    assert_eq!(pool.reserve0, &r_bego + &m_raw);
    assert_eq!(pool.reserve1, &r_wbnb - &out);
    assert_eq!(outcome.delta_w, BigRational::from_integer(out.into()));
    assert!(outcome.profitable, "ΔW > 0");
    assert!(started.elapsed() < Duration::from_secs(1), "runtime bound");
    report(2, "BEGO profitability golden", started);
}

// -- criterion 3 machinery: random linear constraint sets vs brute force --

struct RandomInstance {
    predicates: Vec<Expr>,
    symbols: SymbolTable,
    int_names: Vec<String>,
    bool_names: Vec<String>,
}

fn random_linear_term(rng: &mut ChaCha8Rng, ints: &[String]) -> Expr {
    let mut expr = Expr::Int(BigUint::from(rng.gen_range(0u32..=15)));
    let terms = rng.gen_range(1..=3usize);
    for _ in 0..terms {
        let coeff = rng.gen_range(1u32..=3);
        let sym = Expr::sym(ints[rng.gen_range(0..ints.len())].clone());
        let scaled = if coeff == 1 {
            sym
        } else {
            Expr::bin(BinOp::Mul, Expr::Int(coeff.into()), sym)
        };
        expr = Expr::bin(BinOp::Add, expr, scaled);
    }
    expr
}

fn random_atom(rng: &mut ChaCha8Rng, ints: &[String], bools: &[String]) -> Expr {
    if !bools.is_empty() && rng.gen_bool(0.25) {
        let sym = Expr::sym(bools[rng.gen_range(0..bools.len())].clone());
        return if rng.gen_bool(0.5) { sym } else { Expr::not(sym) };
    }
    let op = match rng.gen_range(0..6) {
        0 => BinOp::Eq,
        1 => BinOp::Ne,
        2 => BinOp::Lt,
        3 => BinOp::Le,
        4 => BinOp::Gt,
        _ => BinOp::Ge,
    };
    let left = random_linear_term(rng, ints);
    let right = random_linear_term(rng, ints);
    let atom = Expr::bin(op, left, right);
    if rng.gen_bool(0.2) {
        Expr::not(atom)
    } else {
        atom
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    let int_count = rng.gen_range(1..=4usize);
    let bool_count = rng.gen_range(0..=2usize);
    let int_names: Vec<String> = (0..int_count).map(|i| format!("x{i}")).collect();
    let bool_names: Vec<String> = (0..bool_count).map(|i| format!("b{i}")).collect();
    let mut symbols = SymbolTable::new();
    for name in &int_names {
        symbols.declare(name, Sort::Int, SymbolOwner::Attacker);
    }
    for name in &bool_names {
        symbols.declare(name, Sort::Bool, SymbolOwner::Attacker);
    }
    let count = rng.gen_range(1..=6usize);
    let predicates = (0..count)
        .map(|_| {
            let atom = random_atom(rng, &int_names, &bool_names);
            if rng.gen_bool(0.3) {
                let other = random_atom(rng, &int_names, &bool_names);
                let op = if rng.gen_bool(0.5) { BinOp::And } else { BinOp::Or };
                Expr::bin(op, atom, other)
            } else {
                atom
            }
        })
        .collect();
    RandomInstance {
        predicates,
        symbols,
        int_names,
        bool_names,
    }
}

/// Compiled form of a predicate for the brute-force oracle: integer-indexed
/// variables and machine arithmetic (all generated values fit in i64 by
/// construction). Deliberately independent of the library's evaluator.
enum Fast {
    Const(i64),
    Var(usize),
    BConst(bool),
    BVar(usize),
    Add(Box<Fast>, Box<Fast>),
    Mul(Box<Fast>, Box<Fast>),
    Cmp(BinOp, Box<Fast>, Box<Fast>),
    Not(Box<Fast>),
    And(Box<Fast>, Box<Fast>),
    Or(Box<Fast>, Box<Fast>),
}

fn compile(e: &Expr, ints: &[String], bools: &[String]) -> Fast {
    use evopoc::reachability::UnOp;
    match e {
        Expr::Int(v) => Fast::Const(i64::try_from(u64::try_from(v).unwrap()).unwrap()),
        Expr::Bool(b) => Fast::BConst(*b),
        Expr::Sym(name) => {
            if let Some(i) = ints.iter().position(|n| n == name) {
                Fast::Var(i)
            } else {
                Fast::BVar(bools.iter().position(|n| n == name).expect("bool symbol"))
            }
        }
        Expr::Unary {
            op: UnOp::Not,
            operand,
        } => Fast::Not(Box::new(compile(operand, ints, bools))),
        Expr::Binary { op, left, right } => {
            let l = Box::new(compile(left, ints, bools));
            let r = Box::new(compile(right, ints, bools));
            match op {
                BinOp::Add => Fast::Add(l, r),
                BinOp::Mul => Fast::Mul(l, r),
                BinOp::And => Fast::And(l, r),
                BinOp::Or => Fast::Or(l, r),
                cmp => Fast::Cmp(*cmp, l, r),
            }
        }
        other => panic!("generator produced {other:?}"),
    }
}

enum FastValue {
    I(i64),
    B(bool),
}

fn eval_fast(f: &Fast, iv: &[i64], bv: &[bool]) -> FastValue {
    match f {
        Fast::Const(v) => FastValue::I(*v),
        Fast::Var(i) => FastValue::I(iv[*i]),
        Fast::BConst(b) => FastValue::B(*b),
        Fast::BVar(i) => FastValue::B(bv[*i]),
        Fast::Add(l, r) => match (eval_fast(l, iv, bv), eval_fast(r, iv, bv)) {
            (FastValue::I(a), FastValue::I(b)) => FastValue::I(a + b),
            _ => unreachable!(),
        },
        Fast::Mul(l, r) => match (eval_fast(l, iv, bv), eval_fast(r, iv, bv)) {
            (FastValue::I(a), FastValue::I(b)) => FastValue::I(a * b),
            _ => unreachable!(),
        },
        Fast::Cmp(op, l, r) => match (eval_fast(l, iv, bv), eval_fast(r, iv, bv)) {
            (FastValue::I(a), FastValue::I(b)) => FastValue::B(match op {
                BinOp::Eq => a == b,
                BinOp::Ne => a != b,
                BinOp::Lt => a < b,
                BinOp::Le => a <= b,
                BinOp::Gt => a > b,
                BinOp::Ge => a >= b,
                _ => unreachable!(),
            }),
            _ => unreachable!(),
        },
        Fast::Not(inner) => match eval_fast(inner, iv, bv) {
            FastValue::B(b) => FastValue::B(!b),
            _ => unreachable!(),
        },
        Fast::And(l, r) => match eval_fast(l, iv, bv) {
            FastValue::B(false) => FastValue::B(false),
            FastValue::B(true) => eval_fast(r, iv, bv),
            _ => unreachable!(),
        },
        Fast::Or(l, r) => match eval_fast(l, iv, bv) {
            FastValue::B(true) => FastValue::B(true),
            FastValue::B(false) => eval_fast(r, iv, bv),
            _ => unreachable!(),
        },
    }
}

/// Exhaustive enumeration over ints in 0..=15 and bools; returns a witness.
fn brute_force(instance: &RandomInstance) -> Option<BTreeMap<String, Value>> {
    let ints = &instance.int_names;
    let bools = &instance.bool_names;
    let compiled: Vec<Fast> = instance
        .predicates
        .iter()
        .map(|p| compile(p, ints, bools))
        .collect();
    let int_space = 16u64.pow(ints.len() as u32);
    let bool_space = 1u64 << bools.len();
    let mut iv = vec![0i64; ints.len()];
    let mut bv = vec![false; bools.len()];
    for i in 0..int_space {
        let mut rest = i;
        for slot in iv.iter_mut() {
            *slot = (rest % 16) as i64;
            rest /= 16;
        }
        for b in 0..bool_space {
            for (k, slot) in bv.iter_mut().enumerate() {
                *slot = b >> k & 1 == 1;
            }
            let all_true = compiled
                .iter()
                .all(|f| matches!(eval_fast(f, &iv, &bv), FastValue::B(true)));
            if all_true {
                let mut model = BTreeMap::new();
                for (name, v) in ints.iter().zip(&iv) {
                    model.insert(name.clone(), Value::Int(BigUint::from(*v as u64)));
                }
                for (name, v) in bools.iter().zip(&bv) {
                    model.insert(name.clone(), Value::Bool(*v));
                }
                return Some(model);
            }
        }
    }
    None
}

/// Criterion 3 — solver/oracle equivalence on 1000 random linear constraint
/// sets over the bounded domain 0..=15: 100% SAT/UNSAT agreement and every
/// model re-satisfies its constraints. Runtime < 60 s.
#[test]
fn criterion_3_solver_matches_brute_force() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xEC0_CAFE);
    let config = SolverConfig {
        domain_max: Some(BigUint::from(15u32)),
        ..SolverConfig::default()
    };
    let mut sat_count = 0usize;
    for i in 0..1000 {
        let instance = random_instance(&mut rng);
        let expected = brute_force(&instance);
        let result = check_sat(&instance.predicates, &instance.symbols, &config)
            .unwrap_or_else(|e| panic!("instance {i} ill-sorted: {e}"));
        match (&expected, &result) {
            (Some(_), SatResult::Sat(model)) => {
                sat_count += 1;
                for p in &instance.predicates {
                    assert_eq!(
                        eval(p, model),
                        Some(Value::Bool(true)),
                        "instance {i}: model must re-satisfy `{p}`"
                    );
                }
            }
            (None, SatResult::Unsat) => {}
            (expected, got) => panic!(
                "instance {i}: disagreement (brute-force {} vs solver {got:?})\npredicates: {:#?}",
                if expected.is_some() { "SAT" } else { "UNSAT" },
                instance
                    .predicates
                    .iter()
                    .map(|p| p.render())
                    .collect::<Vec<_>>()
            ),
        }
    }
    assert!(sat_count > 100, "generator sanity: {sat_count} SAT instances");
    assert!(
        started.elapsed() < Duration::from_secs(60),
        "runtime bound, took {:?}",
        started.elapsed()
    );
    report(3, "solver oracle equivalence (1000 instances)", started);
}

/// Criterion 4 — constant product: 10,000 random swaps never decrease
/// r0·r1, strictly increasing under a fee. Zero violations.
#[test]
fn criterion_4_constant_product_property() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1414);
    let config = SimConfig::default();
    for pool_case in 0..10 {
        let fee_ppm = if pool_case % 2 == 0 { 997_000 } else { 1_000_000 };
        let mut state = AssetState::default();
        state.add_pool(PoolState {
            id: "P".into(),
            token0: "A".into(),
            token1: "B".into(),
            reserve0: BigUint::from(rng.gen_range(10_000u64..1_000_000)),
            reserve1: BigUint::from(rng.gen_range(10_000u64..1_000_000)),
            fee_ppm,
            account: "pool".into(),
        });
        state.credit("trader", "A", &BigUint::from(u64::MAX));
        state.credit("trader", "B", &BigUint::from(u64::MAX));
        let mut flash = BTreeMap::new();
        for _ in 0..1_000 {
            let token_in = if rng.gen_bool(0.5) { "A" } else { "B" };
            let amount_in = BigUint::from(rng.gen_range(0u64..50_000));
            let before = {
                let p = &state.pools["P"];
                &p.reserve0 * &p.reserve1
            };
            evopoc::profitability::apply(
                &mut state,
                &AssetOp::SwapExactIn {
                    pool: "P".into(),
                    token_in: token_in.into(),
                    amount_in: amount_in.clone(),
                    recipient: "trader".into(),
                },
                &config,
                &mut flash,
            )
            .unwrap();
            let after = {
                let p = &state.pools["P"];
                &p.reserve0 * &p.reserve1
            };
            assert!(after >= before, "product must never decrease");
            if fee_ppm < 1_000_000 && amount_in > BigUint::zero() {
                assert!(after > before, "fee-bearing swaps strictly increase the product");
            }
        }
    }
    report(4, "constant-product property (10,000 swaps)", started);
}

// -- criterion 5 machinery: random ontology-conformant case sets --

const WORD_POOL: [&str; 14] = [
    "flash", "loan", "price", "oracle", "reserve", "mint", "collateral", "swap", "fee",
    "transfer", "reentrancy", "liquidation", "vault", "governance",
];

fn random_case(rng: &mut ChaCha8Rng, case_idx: usize) -> CaseSubgraph {
    let case_id = format!("case-{case_idx}");
    let kinds = [
        NodeKind::Protocol,
        NodeKind::AccessControl,
        NodeKind::EconomicModel,
        NodeKind::Dependency,
        NodeKind::FailurePattern,
        NodeKind::Condition,
        NodeKind::Impact,
        NodeKind::RootCause,
        NodeKind::InvariantViolation,
        NodeKind::Skeleton,
        NodeKind::Primitive,
        NodeKind::Example,
    ];
    let node_count = rng.gen_range(3..=9usize);
    // build inside a scratch store so the case is conformant by construction
    let mut scratch = HkgGraph::new();
    let mut nodes = Vec::new();
    for j in 0..node_count {
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let granularity = if kind.layer() == LayerTag::ContractSemantics {
            [
                Granularity::PrimaryCategory,
                Granularity::SubCategory,
                Granularity::ImplementLogic,
            ][rng.gen_range(0..3)]
        } else {
            Granularity::NotApplicable
        };
        let role = if kind == NodeKind::Primitive {
            [
                PrimitiveRole::Setup,
                PrimitiveRole::EnvironmentManipulation,
                PrimitiveRole::ExploitationAndAmplification,
                PrimitiveRole::ArbitrageAndExit,
            ][rng.gen_range(0..4)]
        } else {
            PrimitiveRole::NotApplicable
        };
        let words: Vec<&str> = (0..rng.gen_range(2..=4))
            .map(|_| WORD_POOL[rng.gen_range(0..WORD_POOL.len())])
            .collect();
        let node = HkgNode::new(kind, words.join(" "))
            .with_id(format!("{case_id}-n{j}"))
            .with_granularity(granularity)
            .with_role(role)
            .with_provenance(&case_id);
        scratch.add_node(node.clone()).unwrap();
        nodes.push(node);
    }
    let mut edges = Vec::new();
    for _ in 0..rng.gen_range(0..=node_count * 2) {
        let a = &nodes[rng.gen_range(0..nodes.len())];
        let b = &nodes[rng.gen_range(0..nodes.len())];
        if a.id == b.id {
            continue;
        }
        for kind in EdgeKind::ALL {
            let _ = allowed_pairs(kind);
            let edge = HkgEdge {
                src: a.id.clone(),
                dst: b.id.clone(),
                kind,
            };
            // the scratch store is the conformance arbiter
            if scratch.add_edge(edge.clone()).is_ok() {
                edges.push(edge);
                break;
            }
        }
    }
    CaseSubgraph {
        case_id,
        nodes,
        edges,
    }
}

/// Criterion 5 — fusion idempotence and monotonicity over 100 randomized
/// conformant case sets, with a full admissibility scan at the end.
#[test]
fn criterion_5_fusion_idempotence_and_monotonicity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF051_0A);
    for round in 0..100 {
        let case_count = rng.gen_range(1..=4usize);
        let cases: Vec<CaseSubgraph> = (0..case_count)
            .map(|i| random_case(&mut rng, round * 10 + i))
            .collect();
        let provider = HashedEmbedding::new(64);
        let mut graph = HkgGraph::new();
        let mut index = EmbeddingIndex::new(64);
        let mut judge = CosineJudge::default();
        let config = FusionConfig::default();
        for case in &cases {
            ingest_case(&mut graph, &mut index, &provider, case, &mut judge, &config)
                .unwrap_or_else(|e| panic!("round {round}: {e}"));
        }
        let before = graph.canonical_signature();
        let node_count = graph.node_count();
        // double ingest changes nothing
        for case in &cases {
            let second =
                ingest_case(&mut graph, &mut index, &provider, case, &mut judge, &config)
                    .unwrap();
            assert_eq!(second.inserted(), 0, "round {round}: re-ingest inserted");
        }
        assert_eq!(graph.canonical_signature(), before, "round {round}");
        assert_eq!(graph.node_count(), node_count);
        // monotone bound
        let total_case_nodes: usize = cases.iter().map(|c| c.nodes.len()).sum();
        assert!(
            graph.node_count() <= total_case_nodes,
            "round {round}: {} > {total_case_nodes}",
            graph.node_count()
        );
        // every stored edge admissible by full scan
        let problems = graph.validate();
        assert!(problems.is_empty(), "round {round}: {problems:?}");
    }
    report(5, "fusion idempotence and monotonicity (100 case sets)", started);
}

/// Criterion 6 — end-to-end pipeline golden through the CLI binary.
#[test]
fn criterion_6_end_to_end_pipeline_golden() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let bego = fixtures().join("bego");
    let output = Command::new(env!("CARGO_BIN_EXE_evopoc"))
        .args([
            "analyze",
            bego.to_str().unwrap(),
            "--env",
            bego.join("env.json").to_str().unwrap(),
            "--backend",
            &format!("scripted:{}", bego.join("transcript.json").display()),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let outcome: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(outcome["iterations"], 1);
    let poc = std::fs::read_to_string(dir.path().join("bego_poc.t.sol")).unwrap();
    assert!(poc.contains(".mint("), "PoC contains the mint call");
    assert_eq!(
        poc.matches("new bytes32[](0)").count() + poc.matches("new uint8[](0)").count(),
        3,
        "three empty array literals"
    );
    assert!(
        poc.contains("assertGt(postWealth, preWealth"),
        "strict wealth-increase assertion"
    );
    report(6, "end-to-end pipeline golden (exit 0, PoC written)", started);
}

/// Criterion 7 — a perpetually unprofitable transcript exits 5 after exactly
/// five iterations.
#[test]
fn criterion_7_iteration_cap() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let bego = fixtures().join("bego");
    let output = Command::new(env!("CARGO_BIN_EXE_evopoc"))
        .args([
            "analyze",
            bego.to_str().unwrap(),
            "--env",
            bego.join("env.json").to_str().unwrap(),
            "--backend",
            &format!(
                "scripted:{}",
                bego.join("transcript_unprofitable.json").display()
            ),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(5));
    let outcome: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(outcome["iterations"], 5, "exactly five iterations");
    assert_eq!(outcome["outcome"], "iteration_budget_exhausted");
    report(7, "iteration cap (exit 5 after 5 iterations)", started);
}

/// Criterion 8 — the motivating fee-on-transfer scenario yields ΔW > 0 and
/// its trace matches the precomputed golden file with zero tolerance.
#[test]
fn criterion_8_motivating_example_scenario() {
    let started = Instant::now();
    let text =
        std::fs::read_to_string(fixtures().join("scenarios/fee_on_transfer.json")).unwrap();
    let scenario: ScenarioFile = serde_json::from_str(&text).unwrap();
    let outcome = simulate(
        &scenario.script,
        &scenario.initial,
        &scenario.attacker,
        &scenario.numeraire,
        &SimConfig::default(),
    )
    .unwrap();
    assert!(outcome.delta_w > BigRational::zero(), "ΔW > 0");
    let golden =
        std::fs::read_to_string(fixtures().join("scenarios/fee_on_transfer_trace.golden.json"))
            .unwrap();
    assert_eq!(
        outcome.trace.to_json_string(),
        golden,
        "trace must match the golden file byte-for-byte"
    );
    report(8, "motivating-example scenario (ΔW > 0, golden trace)", started);
}

/// Criterion 9 — stage ordering: across randomized synthesis runs,
/// profitability never executes for an iteration whose reachability stage
/// answered unreachable.
#[test]
fn criterion_9_validation_ordering() {
    use evopoc::fusion::EmbeddingVector;
    use evopoc::memory::WorkingMemory;
    use evopoc::oracle::{BackendPlanOracle, ScriptedBackend};
    use evopoc::pipeline::{exploit_synthesis, ExecutionEnv, PipelineConfig, SynthesisOutcome};

    let started = Instant::now();
    let bego = fixtures().join("bego");
    let model = parse_dir(&bego.join("contracts")).unwrap();
    let env = ExecutionEnv::from_json_str(
        &std::fs::read_to_string(bego.join("env.json")).unwrap(),
    )
    .unwrap();
    let full: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(bego.join("transcript.json")).unwrap(),
    )
    .unwrap();
    let good_plan = full["plans"][0].clone();
    let good_script = full["scripts"][0].clone();
    let empty_script = serde_json::json!({"fragments": [], "projection": [[], [], []]});
    let bad_plan: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(bego.join("plan_infeasible.json")).unwrap(),
    )
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(0x0D0E12);
    let mut unreachable_iterations = 0usize;
    for round in 0..40 {
        // random mix of infeasible, unprofitable, and profitable candidates
        let mut plans = Vec::new();
        let mut scripts = Vec::new();
        for _ in 0..5 {
            match rng.gen_range(0..3) {
                0 => plans.push(bad_plan.clone()),
                1 => {
                    plans.push(good_plan.clone());
                    scripts.push(empty_script.clone());
                }
                _ => {
                    plans.push(good_plan.clone());
                    scripts.push(good_script.clone());
                }
            }
        }
        let mut oracle = BackendPlanOracle::new(ScriptedBackend::with_plans_and_scripts(
            plans, scripts,
        ));
        let wm = WorkingMemory::new(EmbeddingVector::zero(8));
        let outcome =
            exploit_synthesis(&wm, &env, &model, &mut oracle, &PipelineConfig::default())
                .unwrap_or_else(|e| panic!("round {round}: {e}"));
        let diagnostics = outcome.diagnostics();
        for d in diagnostics {
            if !d.stage_one.reachable {
                unreachable_iterations += 1;
                assert!(
                    d.stage_two.is_none(),
                    "round {round}: profitability ran on an unreachable plan"
                );
            }
        }
        if let SynthesisOutcome::Success { diagnostics, .. } = &outcome {
            for d in diagnostics {
                if !d.stage_one.reachable {
                    assert!(d.stage_two.is_none());
                }
            }
        }
    }
    assert!(
        unreachable_iterations > 20,
        "sampler must exercise the unreachable path: {unreachable_iterations}"
    );
    report(
        9,
        "validation ordering (profitability gated on reachability)",
        started,
    );
}
