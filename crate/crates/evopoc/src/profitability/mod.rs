//! Stage-2 validation: abstract asset-level simulation.
//!
//! The state tracks balances, constant-product pool reserves, allowances,
//! and retained-fee ledgers. Scripts are lists of asset ops (mint, transfer
//! with fee splits, swaps, flash loans, skim/sync, retained-fee release);
//! the simulator applies them in order, enforces flash-loan repayment, and
//! reports the net wealth change ΔW in the numeraire.

mod sim;
mod state;

pub use sim::{
    apply, simulate, swap_out, value, ApplyError, SimConfig, SimError, SimOutcome, SimTrace,
    SwapMode, TraceEntry,
};
pub use state::{AssetOp, AssetState, FeeModel, PoolState, Price, Recipient, ScenarioFile};
