//! Orchestration of the synthesis loop: plan generation, two-stage
//! validation (reachability before profitability, always), and PoC emission,
//! under a bounded refinement budget.

mod plan;
mod poc;
mod synthesis;

pub use plan::{ExecutionEnv, ExploitPlan, Phase, PlanError, TxStep};
pub use poc::{emit_poc, PocError};
pub use synthesis::{
    exploit_synthesis, FailureReason, IterationDiagnostic, PipelineConfig, PlanOracle,
    ScriptBundle, StageOneReport, StageTwoReport, SynthesisError, SynthesisOutcome,
};
