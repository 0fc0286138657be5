//! The bounded refinement loop: generate, validate, refine.

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::frontend::{ProjectModel, TraverseConfig};
use crate::memory::WorkingMemory;
use crate::oracle::OracleError;
use crate::profitability::{simulate, AssetOp, SimConfig, SimTrace};
use crate::reachability::{check_path_reachability, Reachability, ReachError, SolverConfig, StepModel};

use super::plan::{ExecutionEnv, ExploitPlan, PlanError};
use super::poc::{emit_poc, PocError};

/// Script-generation result: optional per-step PoC call fragments plus the
/// per-step asset-op projection for stage 2.
#[derive(Debug, Clone, Default)]
pub struct ScriptBundle {
    /// One entry per plan step; `None` falls back to the template renderer.
    pub step_fragments: Vec<Option<String>>,
    /// One op list per plan step.
    pub projection: Vec<Vec<AssetOp>>,
}

/// Plan/script provider driving each refinement iteration.
pub trait PlanOracle {
    fn generate_plan(
        &mut self,
        wm: &WorkingMemory,
        diagnostics: &[IterationDiagnostic],
    ) -> Result<ExploitPlan, OracleError>;

    fn generate_script(
        &mut self,
        plan: &ExploitPlan,
        env: &ExecutionEnv,
    ) -> Result<ScriptBundle, OracleError>;
}

#[derive(Debug, Clone, Serialize)]
pub struct StageOneReport {
    pub reachable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTwoReport {
    /// Exact rational ΔW as `numerator/denominator`.
    pub delta_w: String,
    pub profitable: bool,
    /// First failing op when the simulation aborted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_op: Option<String>,
}

/// Structured feedback for one failed iteration. `stage_two` is `None`
/// whenever stage one was unreachable: profitability never ran.
#[derive(Debug, Clone, Serialize)]
pub struct IterationDiagnostic {
    pub iteration: usize,
    pub stage_one: StageOneReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage_two: Option<StageTwoReport>,
}

#[derive(Debug, Clone, Serialize)]
pub enum FailureReason {
    PathInfeasible { step: usize, witness: String },
    NotProfitable { delta_w: String },
    IterationBudgetExhausted,
}

#[derive(Debug)]
pub enum SynthesisOutcome {
    Success {
        plan: ExploitPlan,
        poc: String,
        delta_w: BigRational,
        trace: SimTrace,
        iterations: usize,
        diagnostics: Vec<IterationDiagnostic>,
    },
    Failure {
        reason: FailureReason,
        iterations: usize,
        diagnostics: Vec<IterationDiagnostic>,
    },
}

impl SynthesisOutcome {
    pub fn iterations(&self) -> usize {
        match self {
            SynthesisOutcome::Success { iterations, .. }
            | SynthesisOutcome::Failure { iterations, .. } => *iterations,
        }
    }

    pub fn diagnostics(&self) -> &[IterationDiagnostic] {
        match self {
            SynthesisOutcome::Success { diagnostics, .. }
            | SynthesisOutcome::Failure { diagnostics, .. } => diagnostics,
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Poc(#[from] PocError),
    #[error("script projection has {got} step entries for a {expected}-step plan")]
    ProjectionMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub iteration_cap: usize,
    pub traverse: TraverseConfig,
    pub solver: SolverConfig,
    pub sim: SimConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            iteration_cap: 5,
            traverse: TraverseConfig::default(),
            solver: SolverConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

/// Run the refinement loop: plan → reachability → script → profitability →
/// PoC, feeding each failure back as a structured diagnostic. Profitability
/// never runs on a plan whose reachability stage failed, and no success can
/// skip either stage.
pub fn exploit_synthesis(
    wm: &WorkingMemory,
    env: &ExecutionEnv,
    model: &ProjectModel,
    oracle: &mut dyn PlanOracle,
    config: &PipelineConfig,
) -> Result<SynthesisOutcome, SynthesisError> {
    let mut diagnostics: Vec<IterationDiagnostic> = Vec::new();

    for iteration in 1..=config.iteration_cap {
        let plan = match oracle.generate_plan(wm, &diagnostics) {
            Ok(plan) => plan,
            Err(OracleError::Exhausted) if !diagnostics.is_empty() => {
                return Ok(terminal_failure(diagnostics, iteration - 1));
            }
            Err(e) => return Err(e.into()),
        };
        plan.validate()?;

        let reach = check_path_reachability(
            &plan.steps,
            env,
            model,
            &config.traverse,
            &config.solver,
        )?;
        let step_models: Vec<StepModel> = match reach {
            Reachability::Unreachable { step, witness } => {
                diagnostics.push(IterationDiagnostic {
                    iteration,
                    stage_one: StageOneReport {
                        reachable: false,
                        failed_step: Some(step),
                        witness: Some(witness),
                    },
                    stage_two: None,
                });
                continue;
            }
            Reachability::Reachable { steps } => steps,
        };

        let bundle = match oracle.generate_script(&plan, env) {
            Ok(bundle) => bundle,
            Err(OracleError::Exhausted) if !diagnostics.is_empty() => {
                return Ok(terminal_failure(diagnostics, iteration - 1));
            }
            Err(e) => return Err(e.into()),
        };
        if bundle.projection.len() != plan.steps.len() {
            return Err(SynthesisError::ProjectionMismatch {
                got: bundle.projection.len(),
                expected: plan.steps.len(),
            });
        }
        let mut plan = plan;
        for (step, ops) in plan.steps.iter_mut().zip(bundle.projection.iter()) {
            step.asset_ops = ops.clone();
        }

        let script = plan.projection();
        let initial = env.initial_state();
        let stage_one = StageOneReport {
            reachable: true,
            failed_step: None,
            witness: None,
        };
        match simulate(&script, &initial, &env.attacker, &env.numeraire, &config.sim) {
            Ok(outcome) if outcome.profitable => {
                let poc = emit_poc(&plan, &step_models, env, model, &bundle.step_fragments)?;
                return Ok(SynthesisOutcome::Success {
                    plan,
                    poc,
                    delta_w: outcome.delta_w,
                    trace: outcome.trace,
                    iterations: iteration,
                    diagnostics,
                });
            }
            Ok(outcome) => {
                diagnostics.push(IterationDiagnostic {
                    iteration,
                    stage_one,
                    stage_two: Some(StageTwoReport {
                        delta_w: format!("{}/{}", outcome.delta_w_num, outcome.delta_w_den),
                        profitable: false,
                        failed_op: None,
                    }),
                });
            }
            Err(sim_err) => {
                diagnostics.push(IterationDiagnostic {
                    iteration,
                    stage_one,
                    stage_two: Some(StageTwoReport {
                        delta_w: "0/1".into(),
                        profitable: false,
                        failed_op: Some(format!("step {}: {}", sim_err.step, sim_err.error)),
                    }),
                });
            }
        }
    }

    Ok(SynthesisOutcome::Failure {
        reason: FailureReason::IterationBudgetExhausted,
        iterations: config.iteration_cap,
        diagnostics,
    })
}

/// The oracle gave up mid-loop: classify by the last diagnostic.
fn terminal_failure(
    diagnostics: Vec<IterationDiagnostic>,
    iterations: usize,
) -> SynthesisOutcome {
    let reason = match diagnostics.last() {
        Some(d) if !d.stage_one.reachable => FailureReason::PathInfeasible {
            step: d.stage_one.failed_step.unwrap_or(0),
            witness: d.stage_one.witness.clone().unwrap_or_default(),
        },
        Some(d) => FailureReason::NotProfitable {
            delta_w: d
                .stage_two
                .as_ref()
                .map(|s| s.delta_w.clone())
                .unwrap_or_else(|| "0/1".into()),
        },
        None => FailureReason::IterationBudgetExhausted,
    };
    SynthesisOutcome::Failure {
        reason,
        iterations,
        diagnostics,
    }
}
