//! Op semantics, valuation, and the simulation loop.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use super::state::{AssetOp, AssetState, FeeModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("insufficient balance: {account} holds {held} {token}, needs {needed}")]
    InsufficientBalance {
        account: String,
        token: String,
        held: BigUint,
        needed: BigUint,
    },
    #[error("insufficient reserve in pool {pool} for {token}")]
    InsufficientReserve { pool: String, token: String },
    #[error("unknown pool {0}")]
    UnknownPool(String),
    #[error("token {token} is not in pool {pool}")]
    TokenNotInPool { pool: String, token: String },
    #[error("swap against an empty pool {0}")]
    EmptyPool(String),
    #[error("malformed fee model: burn {burn} + retained {retained} != rate {rate}")]
    BadFeeModel { rate: u32, burn: u32, retained: u32 },
    #[error("flash loan in {token} not fully repaid: {outstanding} outstanding")]
    UnmatchedFlashLoan { token: String, outstanding: BigUint },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapMode {
    /// Constant-product execution with the pool's fee factor (default).
    Amm,
    /// Spot-price execution without slippage.
    Idealized,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub mode: SwapMode,
    /// Flash-loan fee in parts per million of the principal.
    pub flash_fee_ppm: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mode: SwapMode::Amm,
            flash_fee_ppm: 0,
        }
    }
}

/// Constant-product output amount for an exact input.
///
/// `out = ⌊γ·x·R_out / (R_in·10⁶ + γ·x)⌋` with the fee factor γ in parts per
/// million; strictly less than `reserve_out` for non-empty pools.
pub fn swap_out(
    amount_in: &BigUint,
    reserve_in: &BigUint,
    reserve_out: &BigUint,
    fee_ppm: u32,
) -> Result<BigUint, ApplyError> {
    if reserve_in.is_zero() || reserve_out.is_zero() {
        return Err(ApplyError::EmptyPool(String::new()));
    }
    let ppm = BigUint::from(1_000_000u32);
    let gamma = BigUint::from(fee_ppm);
    let gx = &gamma * amount_in;
    let numerator = &gx * reserve_out;
    let denominator = reserve_in * &ppm + &gx;
    Ok(numerator / denominator)
}

/// One applied op with the state snapshot after it.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub step: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<AssetOp>,
    pub state: AssetState,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct SimTrace {
    pub entries: Vec<TraceEntry>,
}

impl SimTrace {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization cannot fail")
    }
}

fn fee_split(amount: &BigUint, fee: &FeeModel) -> Result<(BigUint, BigUint, BigUint), ApplyError> {
    if fee.burn_bps + fee.retained_bps != fee.rate_bps {
        return Err(ApplyError::BadFeeModel {
            rate: fee.rate_bps,
            burn: fee.burn_bps,
            retained: fee.retained_bps,
        });
    }
    let bps = BigUint::from(10_000u32);
    let total_fee = amount * BigUint::from(fee.rate_bps) / &bps;
    let burned = amount * BigUint::from(fee.burn_bps) / &bps;
    // exact remainder so delivered + burned + retained == amount
    let retained = &total_fee - &burned;
    let delivered = amount - &total_fee;
    Ok((delivered, burned, retained))
}

fn take(
    state: &mut AssetState,
    account: &str,
    token: &str,
    amount: &BigUint,
) -> Result<(), ApplyError> {
    let held = state.balance(account, token);
    if held < *amount {
        return Err(ApplyError::InsufficientBalance {
            account: account.to_string(),
            token: token.to_string(),
            held,
            needed: amount.clone(),
        });
    }
    state.set_balance(account, token, held - amount);
    Ok(())
}

/// Apply one op; on success the state reflects it.
pub fn apply(
    state: &mut AssetState,
    op: &AssetOp,
    config: &SimConfig,
    flash_owed: &mut BTreeMap<String, BigUint>,
) -> Result<(), ApplyError> {
    match op {
        AssetOp::Mint { token, to, amount } => {
            state.credit(to, token, amount);
            Ok(())
        }
        AssetOp::Burn {
            token,
            from,
            amount,
        } => take(state, from, token, amount),
        AssetOp::Transfer {
            token,
            from,
            to,
            amount,
            fee,
        } => {
            take(state, from, token, amount)?;
            match fee {
                None => {
                    state.credit(to, token, amount);
                }
                Some(model) => {
                    let (delivered, _burned, retained) = fee_split(amount, model)?;
                    state.credit(to, token, &delivered);
                    state.credit(&model.retention_holder, token, &retained);
                    let key = (token.clone(), model.retention_holder.clone());
                    let ledger = state.retained.entry(key).or_default();
                    *ledger += &retained;
                    // the burned share simply leaves the supply
                }
            }
            Ok(())
        }
        AssetOp::Approve {
            owner,
            spender,
            token,
            amount,
        } => {
            state
                .allowances
                .insert((owner.clone(), spender.clone(), token.clone()), amount.clone());
            Ok(())
        }
        AssetOp::SwapExactIn {
            pool,
            token_in,
            amount_in,
            recipient,
        } => {
            let p = state
                .pools
                .get(pool)
                .cloned()
                .ok_or_else(|| ApplyError::UnknownPool(pool.clone()))?;
            let token_out = if *token_in == p.token0 {
                p.token1.clone()
            } else if *token_in == p.token1 {
                p.token0.clone()
            } else {
                return Err(ApplyError::TokenNotInPool {
                    pool: pool.clone(),
                    token: token_in.clone(),
                });
            };
            let reserve_in = p.reserve_of(token_in).expect("checked").clone();
            let reserve_out = p.reserve_of(&token_out).expect("checked").clone();
            let out = match config.mode {
                SwapMode::Amm => swap_out(amount_in, &reserve_in, &reserve_out, p.fee_ppm)
                    .map_err(|_| ApplyError::EmptyPool(pool.clone()))?,
                SwapMode::Idealized => {
                    if reserve_in.is_zero() {
                        return Err(ApplyError::EmptyPool(pool.clone()));
                    }
                    amount_in * &reserve_out / &reserve_in
                }
            };
            if out > reserve_out || out > state.balance(&p.account, &token_out) {
                return Err(ApplyError::InsufficientReserve {
                    pool: pool.clone(),
                    token: token_out.clone(),
                });
            }
            // the recipient funds the input side
            take(state, recipient, token_in, amount_in)?;
            state.credit(&p.account, token_in, amount_in);
            take(state, &p.account, &token_out, &out)?;
            state.credit(recipient, &token_out, &out);
            let p = state.pools.get_mut(pool).expect("checked");
            if *token_in == p.token0 {
                p.reserve0 += amount_in;
                p.reserve1 -= &out;
            } else {
                p.reserve1 += amount_in;
                p.reserve0 -= &out;
            }
            Ok(())
        }
        AssetOp::FlashBorrow { token, amount, to } => {
            state.credit(to, token, amount);
            let fee = amount * BigUint::from(config.flash_fee_ppm) / BigUint::from(1_000_000u32);
            let owed = flash_owed.entry(token.clone()).or_default();
            *owed += amount + fee;
            Ok(())
        }
        AssetOp::FlashRepay {
            token,
            amount,
            from,
        } => {
            take(state, from, token, amount)?;
            let owed = flash_owed.entry(token.clone()).or_default();
            if *owed <= *amount {
                *owed = BigUint::zero();
            } else {
                *owed -= amount;
            }
            Ok(())
        }
        AssetOp::Skim { pool, to } => {
            let p = state
                .pools
                .get(pool)
                .cloned()
                .ok_or_else(|| ApplyError::UnknownPool(pool.clone()))?;
            for token in [p.token0.clone(), p.token1.clone()] {
                let held = state.balance(&p.account, &token);
                let reserve = p.reserve_of(&token).expect("own token").clone();
                if held > reserve {
                    let surplus = &held - &reserve;
                    take(state, &p.account, &token, &surplus)?;
                    state.credit(to, &token, &surplus);
                }
            }
            Ok(())
        }
        AssetOp::Sync { pool } => {
            let p = state
                .pools
                .get(pool)
                .cloned()
                .ok_or_else(|| ApplyError::UnknownPool(pool.clone()))?;
            let b0 = state.balance(&p.account, &p.token0);
            let b1 = state.balance(&p.account, &p.token1);
            let p = state.pools.get_mut(pool).expect("checked");
            p.reserve0 = b0;
            p.reserve1 = b1;
            Ok(())
        }
        AssetOp::ReleaseRetained {
            token,
            holder,
            recipients,
        } => {
            let key = (token.clone(), holder.clone());
            let ledger = state.retained.get(&key).cloned().unwrap_or_default();
            let total_weight: u64 = recipients.iter().map(|r| r.weight).sum();
            if ledger.is_zero() || total_weight == 0 {
                return Ok(());
            }
            let mut paid_total = BigUint::zero();
            let mut payouts = Vec::new();
            for r in recipients {
                let share = &ledger * BigUint::from(r.weight) / BigUint::from(total_weight);
                paid_total += &share;
                payouts.push((r.account.clone(), share));
            }
            take(state, holder, token, &paid_total)?;
            for (account, share) in payouts {
                state.credit(&account, token, &share);
            }
            // rounding dust stays in the ledger
            let remaining = &ledger - &paid_total;
            if remaining.is_zero() {
                state.retained.remove(&key);
            } else {
                state.retained.insert(key, remaining);
            }
            Ok(())
        }
    }
}

/// Wealth of `accounts` in numeraire units: the numeraire counts at face
/// value, tokens with a pool against the numeraire at the spot ratio, tokens
/// with only an oracle price at that price, everything else at zero.
pub fn value(state: &AssetState, numeraire: &str, accounts: &[String]) -> BigRational {
    let mut total = BigRational::zero();
    for ((account, token), amount) in &state.balances {
        if !accounts.iter().any(|a| a == account) {
            continue;
        }
        let amount = BigRational::from_integer(amount.clone().into());
        if token == numeraire {
            total += amount;
            continue;
        }
        if let Some(pool) = state
            .pools
            .values()
            .find(|p| p.tokens().contains(&token.as_str()) && p.tokens().contains(&numeraire))
        {
            let r_num = pool.reserve_of(numeraire).expect("pool token").clone();
            let r_tok = pool.reserve_of(token).expect("pool token").clone();
            if !r_tok.is_zero() {
                let spot = BigRational::new(r_num.into(), r_tok.into());
                total += amount * spot;
            }
            continue;
        }
        if let Some(price) = state.prices.get(token) {
            if !price.den.is_zero() {
                let p = BigRational::new(price.num.clone().into(), price.den.clone().into());
                total += amount * p;
            }
        }
        // no pool and no oracle price: contributes zero
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutcome {
    pub final_state: AssetState,
    pub trace: SimTrace,
    /// Net wealth change in numeraire units, exact rational as num/den.
    pub delta_w_num: String,
    pub delta_w_den: String,
    pub profitable: bool,
    #[serde(skip)]
    pub delta_w: BigRational,
}

#[derive(Debug, Error)]
#[error("simulation aborted at step {step}: {error}")]
pub struct SimError {
    pub step: usize,
    pub error: ApplyError,
    /// Trace up to (not including) the failed op.
    pub trace: SimTrace,
}

/// Apply `script` in order from `initial`; every flash borrow must be fully
/// repaid by the end. ΔW compares attacker wealth before and after; the
/// verdict is profitable iff ΔW > 0.
pub fn simulate(
    script: &[AssetOp],
    initial: &AssetState,
    attacker_accounts: &[String],
    numeraire: &str,
    config: &SimConfig,
) -> Result<SimOutcome, SimError> {
    let mut state = initial.clone();
    let mut trace = SimTrace::default();
    trace.entries.push(TraceEntry {
        step: "S0".into(),
        op: None,
        state: state.clone(),
    });
    let mut flash_owed: BTreeMap<String, BigUint> = BTreeMap::new();

    for (i, op) in script.iter().enumerate() {
        if let Err(error) = apply(&mut state, op, config, &mut flash_owed) {
            return Err(SimError {
                step: i + 1,
                error,
                trace,
            });
        }
        trace.entries.push(TraceEntry {
            step: format!("S{}", i + 1),
            op: Some(op.clone()),
            state: state.clone(),
        });
    }

    for (token, owed) in &flash_owed {
        if !owed.is_zero() {
            return Err(SimError {
                step: script.len(),
                error: ApplyError::UnmatchedFlashLoan {
                    token: token.clone(),
                    outstanding: owed.clone(),
                },
                trace,
            });
        }
    }

    let before = value(initial, numeraire, attacker_accounts);
    let after = value(&state, numeraire, attacker_accounts);
    let delta_w = after - before;
    Ok(SimOutcome {
        final_state: state,
        trace,
        delta_w_num: delta_w.numer().to_string(),
        delta_w_den: delta_w.denom().to_string(),
        profitable: delta_w > BigRational::zero(),
        delta_w,
    })
}
