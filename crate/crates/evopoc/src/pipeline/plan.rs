//! Exploit plans, transaction steps, and the execution environment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{SigmaBindings, TargetOp};
use crate::ontology::NodeId;
use crate::profitability::{AssetOp, PoolState, Price};

/// Attack phase of a step. Phases must appear in this order within a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Preparation,
    Exploitation,
    Extraction,
}

/// One transaction: target contract, entrance function, parameters (concrete
/// values or symbol names), and the target operation to reach.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TxStep {
    pub contract: String,
    pub function: String,
    #[serde(default)]
    pub params: SigmaBindings,
    pub target: TargetOp,
    pub phase: Phase,
    /// Working-memory nodes this step is grounded in.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeId>,
    /// Asset-op projection for stage-2 simulation; filled by script
    /// generation or supplied directly in plan files.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub asset_ops: Vec<AssetOp>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExploitPlan {
    pub steps: Vec<TxStep>,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan phases out of order at step {0}")]
    PhasesOutOfOrder(usize),
    #[error("non-empty plan has no exploitation step")]
    NoExploitationStep,
    #[error("malformed plan: {0}")]
    Malformed(String),
}

impl ExploitPlan {
    /// Structural validation: phases in order, at least one exploitation
    /// step when non-empty.
    pub fn validate(&self) -> Result<(), PlanError> {
        let mut last = Phase::Preparation;
        for (i, step) in self.steps.iter().enumerate() {
            if step.phase < last {
                return Err(PlanError::PhasesOutOfOrder(i));
            }
            last = step.phase;
        }
        if !self.steps.is_empty() && !self.steps.iter().any(|s| s.phase == Phase::Exploitation) {
            return Err(PlanError::NoExploitationStep);
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, PlanError> {
        let plan: ExploitPlan =
            serde_json::from_str(text).map_err(|e| PlanError::Malformed(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    /// Flattened stage-2 script across all steps.
    pub fn projection(&self) -> Vec<AssetOp> {
        self.steps
            .iter()
            .flat_map(|s| s.asset_ops.iter().cloned())
            .collect()
    }
}

/// Deployment context: addresses, chain metadata, initial pool state, and
/// the numeraire for ΔW.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExecutionEnv {
    pub addresses: BTreeMap<String, String>,
    pub block: u64,
    pub chain: String,
    pub numeraire: String,
    #[serde(default)]
    pub tokens: Vec<String>,
    #[serde(default)]
    pub pools: Vec<PoolState>,
    #[serde(default)]
    pub prices: Vec<(String, Price)>,
    /// Accounts whose wealth counts as the attacker's; defaults to
    /// `["attacker"]`.
    #[serde(default = "default_attacker")]
    pub attacker: Vec<String>,
}

fn default_attacker() -> Vec<String> {
    vec!["attacker".to_string()]
}

impl ExecutionEnv {
    pub fn from_json_str(text: &str) -> Result<Self, PlanError> {
        serde_json::from_str(text).map_err(|e| PlanError::Malformed(e.to_string()))
    }

    pub fn address_of(&self, name: &str) -> Option<&str> {
        self.addresses.get(name).map(String::as_str)
    }

    /// Initial asset state implied by the environment.
    pub fn initial_state(&self) -> crate::profitability::AssetState {
        let mut state = crate::profitability::AssetState::default();
        for pool in &self.pools {
            state.add_pool(pool.clone());
        }
        for (token, price) in &self.prices {
            state.prices.insert(token.clone(), price.clone());
        }
        state
    }
}
