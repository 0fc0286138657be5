//! Asset-simulation behavior: swap math, op semantics, valuation, and the
//! two golden scenarios (signature-bypass liquidation, fee-on-transfer
//! drain). Golden expectations are computed with independent exact-rational
//! oracles inside the tests before being asserted.

use std::path::PathBuf;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use evopoc::profitability::{
    simulate, swap_out, value, ApplyError, AssetOp, AssetState, FeeModel, PoolState,
    ScenarioFile, SimConfig,
};

fn wei(units: u64) -> BigUint {
    BigUint::from(units) * BigUint::from(10u8).pow(18)
}

fn big(text: &str) -> BigUint {
    BigUint::parse_bytes(text.as_bytes(), 10).unwrap()
}

/// Exact rational oracle for the constant-product output.
fn swap_out_oracle(x: &BigUint, r_in: &BigUint, r_out: &BigUint, gamma_ppm: u32) -> BigUint {
    let gamma = BigRational::new(BigUint::from(gamma_ppm).into(), 1_000_000.into());
    let x = BigRational::from_integer(x.clone().into());
    let r_in = BigRational::from_integer(r_in.clone().into());
    let r_out = BigRational::from_integer(r_out.clone().into());
    let exact = (&gamma * &x * r_out) / (r_in + gamma * x);
    exact.floor().to_integer().to_biguint().unwrap()
}

#[test]
fn swap_out_matches_the_rational_oracle() {
    // no-fee symmetry: swapping the whole input reserve halves the output
    let out = swap_out(&wei(50), &wei(50), &wei(31), 1_000_000).unwrap();
    assert_eq!(out, wei(31) / BigUint::from(2u8));

    // derived example, fee-adjusted: computed with exact rationals first
    let (x, r_in, r_out) = (BigUint::from(1000u32), BigUint::from(10000u32), BigUint::from(100u32));
    let expected = swap_out_oracle(&x, &r_in, &r_out, 997_000);
    assert_eq!(expected, BigUint::from(9u32), "oracle sanity");
    assert_eq!(swap_out(&x, &r_in, &r_out, 997_000).unwrap(), expected);

    // zero input yields zero output
    assert_eq!(
        swap_out(&BigUint::zero(), &r_in, &r_out, 997_000).unwrap(),
        BigUint::zero()
    );

    assert!(matches!(
        swap_out(&x, &BigUint::zero(), &r_out, 997_000),
        Err(ApplyError::EmptyPool(_))
    ));
}

#[test]
fn swap_out_is_monotone_and_bounded() {
    let r_in = big("600000000000000000000000");
    let r_out = big("2000000000000000000000");
    let mut previous = BigUint::zero();
    for k in 0..60u32 {
        let x = BigUint::from(k) * big("50000000000000000000000000000");
        let out = swap_out(&x, &r_in, &r_out, 997_000).unwrap();
        assert!(out >= previous, "monotone nondecreasing in the input");
        assert!(out < r_out, "never drains the full output reserve");
        previous = out;
    }
}

#[test]
fn mint_credits_the_attacker() {
    let mut state = AssetState::default();
    let mut flash = Default::default();
    let amount = big("1000000000000000000000000000000"); // 10^12 * 10^18
    evopoc::profitability::apply(
        &mut state,
        &AssetOp::Mint {
            token: "BEGO".into(),
            to: "attacker".into(),
            amount: amount.clone(),
        },
        &SimConfig::default(),
        &mut flash,
    )
    .unwrap();
    assert_eq!(state.balance("attacker", "BEGO"), amount);
}

#[test]
fn fee_on_transfer_splits_exactly() {
    // 10% fee: 3% burned, 7% retained -> recipient +90, supply -3, ledger +7
    let mut state = AssetState::default();
    state.credit("sender", "MKY", &BigUint::from(100u32));
    let before_supply = state.total_supply("MKY");
    let mut flash = Default::default();
    evopoc::profitability::apply(
        &mut state,
        &AssetOp::Transfer {
            token: "MKY".into(),
            from: "sender".into(),
            to: "recipient".into(),
            amount: BigUint::from(100u32),
            fee: Some(FeeModel {
                rate_bps: 1000,
                burn_bps: 300,
                retained_bps: 700,
                retention_holder: "pair".into(),
            }),
        },
        &SimConfig::default(),
        &mut flash,
    )
    .unwrap();
    assert_eq!(state.balance("recipient", "MKY"), BigUint::from(90u32));
    assert_eq!(state.balance("pair", "MKY"), BigUint::from(7u32));
    assert_eq!(
        state.retained[&("MKY".to_string(), "pair".to_string())],
        BigUint::from(7u32)
    );
    assert_eq!(
        before_supply - state.total_supply("MKY"),
        BigUint::from(3u32),
        "burned share leaves the supply"
    );
}

#[test]
fn feeless_transfer_conserves_supply() {
    let mut state = AssetState::default();
    state.credit("a", "TOK", &wei(1234));
    let supply = state.total_supply("TOK");
    let mut flash = Default::default();
    evopoc::profitability::apply(
        &mut state,
        &AssetOp::Transfer {
            token: "TOK".into(),
            from: "a".into(),
            to: "b".into(),
            amount: wei(34),
            fee: None,
        },
        &SimConfig::default(),
        &mut flash,
    )
    .unwrap();
    assert_eq!(state.total_supply("TOK"), supply);
}

#[test]
fn flash_repay_beyond_balance_fails() {
    let state = AssetState::default();
    let script = vec![
        AssetOp::FlashBorrow {
            token: "WBNB".into(),
            amount: wei(5),
            to: "attacker".into(),
        },
        AssetOp::FlashRepay {
            token: "WBNB".into(),
            amount: wei(6),
            from: "attacker".into(),
        },
    ];
    let err = simulate(&script, &state, &["attacker".into()], "WBNB", &SimConfig::default())
        .unwrap_err();
    assert!(matches!(err.error, ApplyError::InsufficientBalance { .. }));
    assert_eq!(err.trace.entries.len(), 2, "partial trace: initial + borrow");
}

#[test]
fn unmatched_flash_loan_is_rejected_at_the_end() {
    let state = AssetState::default();
    let script = vec![AssetOp::FlashBorrow {
        token: "WBNB".into(),
        amount: wei(5),
        to: "attacker".into(),
    }];
    let err = simulate(&script, &state, &["attacker".into()], "WBNB", &SimConfig::default())
        .unwrap_err();
    assert!(matches!(err.error, ApplyError::UnmatchedFlashLoan { .. }));
}

#[test]
fn valuation_rules() {
    let mut state = AssetState::default();
    state.add_pool(PoolState {
        id: "BEGO/WBNB".into(),
        token0: "BEGO".into(),
        token1: "WBNB".into(),
        reserve0: wei(600_000),
        reserve1: wei(2_000),
        fee_ppm: 997_000,
        account: "pair".into(),
    });
    state.credit("attacker", "WBNB", &wei(7));
    state.credit("attacker", "BEGO", &wei(300)); // 300 * (2000/600000) = 1 WBNB
    state.credit("attacker", "GHOST", &wei(100)); // no pool, no oracle: 0

    let attacker = vec!["attacker".to_string()];
    let total = value(&state, "WBNB", &attacker);
    let expected = BigRational::from_integer(wei(8).into());
    assert_eq!(total, expected);

    // a state valued against itself changes nothing
    let delta = value(&state, "WBNB", &attacker) - value(&state, "WBNB", &attacker);
    assert_eq!(delta, BigRational::zero());
}

#[test]
fn empty_script_is_not_profitable() {
    let outcome = simulate(
        &[],
        &AssetState::default(),
        &["attacker".into()],
        "WBNB",
        &SimConfig::default(),
    )
    .unwrap();
    assert_eq!(outcome.delta_w, BigRational::zero());
    assert!(!outcome.profitable);
    assert_eq!(outcome.trace.entries.len(), 1, "initial snapshot only");
}

#[test]
fn bego_script_reproduces_the_step_table_shape() {
    let mut initial = AssetState::default();
    let r_bego = big("600000000000000000000000");
    let r_wbnb = big("2000000000000000000000");
    initial.add_pool(PoolState {
        id: "BEGO/WBNB".into(),
        token0: "BEGO".into(),
        token1: "WBNB".into(),
        reserve0: r_bego.clone(),
        reserve1: r_wbnb.clone(),
        fee_ppm: 997_000,
        account: "pair".into(),
    });
    let m_raw = big("1000000000000000000000000000000"); // 10^12 x 10^18
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
    let attacker = vec!["attacker".to_string()];
    let outcome = simulate(&script, &initial, &attacker, "WBNB", &SimConfig::default()).unwrap();

    // oracle value for the swap output, exact rational, zero tolerance
    let out = swap_out_oracle(&m_raw, &r_bego, &r_wbnb, 997_000);
    assert!(out > BigUint::zero());

    // attacker BEGO: 0 -> M_raw -> 0; WBNB: 0 -> out
    let entries = &outcome.trace.entries;
    assert_eq!(entries.len(), 4);
    assert_eq!(entries[0].state.balance("attacker", "BEGO"), BigUint::zero());
    assert_eq!(entries[1].state.balance("attacker", "BEGO"), m_raw);
    assert_eq!(entries[2].state.balance("attacker", "BEGO"), m_raw);
    assert_eq!(entries[3].state.balance("attacker", "BEGO"), BigUint::zero());
    assert_eq!(entries[3].state.balance("attacker", "WBNB"), out);

    // reserves (R_B, R_W) -> (R_B + x, R_W - out)
    let pool = &entries[3].state.pools["BEGO/WBNB"];
    assert_eq!(pool.reserve0, &r_bego + &m_raw);
    assert_eq!(pool.reserve1, &r_wbnb - &out);

    // ΔW = out > 0
    assert_eq!(outcome.delta_w, BigRational::from_integer(out.into()));
    assert!(outcome.profitable);
}

fn scenario_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/scenarios")
}

/// Independent oracle replay of the fee-on-transfer scenario: every balance
/// movement recomputed from first principles with exact integers.
struct FeeScenarioOracle {
    t0: BigUint,
    ledger_total: BigUint,
    attacker_final_mky: BigUint,
    out_wbnb: BigUint,
    profit: BigUint,
}

fn fee_scenario_oracle() -> FeeScenarioOracle {
    let e18 = BigUint::from(10u8).pow(18);
    let r_mky = BigUint::from(1_000_000u32) * &e18;
    let r_wbnb = BigUint::from(10_000u32) * &e18;
    let borrow = BigUint::from(10_000u32) * &e18;

    let t0 = swap_out_oracle(&borrow, &r_wbnb, &r_mky, 1_000_000);
    let (r_mky, r_wbnb) = (&r_mky - &t0, &r_wbnb + &borrow);

    let bps = BigUint::from(10_000u32);
    let mut attacker = t0.clone();
    let mut ledger = BigUint::zero();
    for _ in 0..2 {
        let amount = attacker.clone();
        let fee = &amount * BigUint::from(1000u32) / &bps;
        let burned = &amount * BigUint::from(300u32) / &bps;
        let retained = &fee - &burned;
        // delivered + retained land in the pair and come back via skim
        attacker = &amount - &fee + &retained;
        ledger += &retained;
    }
    // release with weights 2,1,1,1,1
    let total_w = BigUint::from(6u32);
    let mut paid = BigUint::zero();
    for w in [2u32, 1, 1, 1, 1] {
        paid += &ledger * BigUint::from(w) / &total_w;
    }
    let pair_mky = &r_mky - &paid; // post-release balance; sync adopts it
    let out = swap_out_oracle(&attacker, &pair_mky, &r_wbnb, 1_000_000);
    FeeScenarioOracle {
        t0,
        ledger_total: ledger,
        attacker_final_mky: BigUint::zero(),
        out_wbnb: out.clone(),
        profit: &out - &borrow,
    }
}

#[test]
fn fee_on_transfer_scenario_is_profitable_and_matches_golden() {
    let text = std::fs::read_to_string(scenario_path().join("fee_on_transfer.json")).unwrap();
    let scenario: ScenarioFile = serde_json::from_str(&text).unwrap();
    let outcome = simulate(
        &scenario.script,
        &scenario.initial,
        &scenario.attacker,
        &scenario.numeraire,
        &SimConfig::default(),
    )
    .unwrap();

    let oracle = fee_scenario_oracle();
    assert!(oracle.profit > BigUint::zero(), "oracle says profitable");

    // exact agreement with the oracle, zero tolerance
    let entries = &outcome.trace.entries;
    assert_eq!(entries[2].state.balance("attacker", "MKY"), oracle.t0);
    let ledger_after_second_transfer = entries[5]
        .state
        .retained
        .get(&("MKY".to_string(), "pair".to_string()))
        .cloned()
        .unwrap_or_default();
    assert_eq!(ledger_after_second_transfer, oracle.ledger_total);
    let final_state = &outcome.final_state;
    assert_eq!(
        final_state.balance("attacker", "MKY"),
        oracle.attacker_final_mky
    );
    assert_eq!(final_state.balance("attacker", "WBNB"), oracle.profit);
    assert_eq!(
        outcome.delta_w,
        BigRational::from_integer(oracle.profit.clone().into())
    );
    assert!(outcome.profitable, "ΔW must be positive");
    let _ = oracle.out_wbnb;

    // frozen golden trace, byte-for-byte
    let golden_path = scenario_path().join("fee_on_transfer_trace.golden.json");
    let rendered = outcome.trace.to_json_string();
    if std::env::var("EVOPOC_BLESS").is_ok() {
        std::fs::write(&golden_path, &rendered).unwrap();
    }
    let golden = std::fs::read_to_string(&golden_path).expect("golden trace present");
    assert_eq!(rendered, golden, "trace drifted from the golden file");
}

#[test]
fn replaying_a_trace_reproduces_every_snapshot() {
    let text = std::fs::read_to_string(scenario_path().join("fee_on_transfer.json")).unwrap();
    let scenario: ScenarioFile = serde_json::from_str(&text).unwrap();
    let config = SimConfig::default();
    let outcome = simulate(
        &scenario.script,
        &scenario.initial,
        &scenario.attacker,
        &scenario.numeraire,
        &config,
    )
    .unwrap();

    // replay from the trace's initial snapshot
    let mut state = outcome.trace.entries[0].state.clone();
    let mut flash = Default::default();
    for (i, entry) in outcome.trace.entries.iter().skip(1).enumerate() {
        let op = entry.op.as_ref().expect("op entry");
        evopoc::profitability::apply(&mut state, op, &config, &mut flash).unwrap();
        assert_eq!(&state, &entry.state, "replay diverged at step {}", i + 1);
    }
}

#[test]
fn constant_product_never_decreases() {
    let mut state = AssetState::default();
    state.add_pool(PoolState {
        id: "A/B".into(),
        token0: "A".into(),
        token1: "B".into(),
        reserve0: wei(1_000),
        reserve1: wei(500),
        fee_ppm: 997_000,
        account: "pool".into(),
    });
    state.credit("trader", "A", &wei(1_000_000));
    state.credit("trader", "B", &wei(1_000_000));
    let config = SimConfig::default();
    let mut flash = Default::default();
    let mut seed = 0x9e3779b97f4a7c15u64;
    for _ in 0..500 {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let token_in = if seed & 1 == 0 { "A" } else { "B" };
        let amount = BigUint::from(seed % 1_000_000 + 1) * BigUint::from(10u64).pow(12);
        let before = {
            let p = &state.pools["A/B"];
            &p.reserve0 * &p.reserve1
        };
        evopoc::profitability::apply(
            &mut state,
            &AssetOp::SwapExactIn {
                pool: "A/B".into(),
                token_in: token_in.into(),
                amount_in: amount.clone(),
                recipient: "trader".into(),
            },
            &config,
            &mut flash,
        )
        .unwrap();
        let after = {
            let p = &state.pools["A/B"];
            &p.reserve0 * &p.reserve1
        };
        assert!(after > before, "fee-bearing swaps strictly grow the product");
        let _ = BigUint::one();
    }
}
