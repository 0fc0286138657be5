//! Per-step reachability over a plan: traverse, collect, decide.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frontend::{
    collect_predicates, sigma_constraints, traverse_paths, FrontendError, ProjectModel,
    TraverseConfig,
};
use crate::pipeline::{ExecutionEnv, TxStep};

use super::expr::Value;
use super::solver::{check_sat, SatResult, SolverConfig, SolverError};

/// Stage-1 verdict for one step.
#[derive(Debug, Clone)]
pub struct StepModel {
    pub step: usize,
    pub hops: Vec<String>,
    /// Concretized symbol assignment; empty when the solver answered
    /// `Unknown` (treated as reachable).
    pub model: BTreeMap<String, Value>,
    pub unknown_reason: Option<String>,
    /// Rendered predicates the verdict was computed over.
    pub predicates: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum Reachability {
    Reachable { steps: Vec<StepModel> },
    Unreachable { step: usize, witness: String },
}

impl Reachability {
    pub fn is_reachable(&self) -> bool {
        matches!(self, Reachability::Reachable { .. })
    }
}

#[derive(Debug, Error)]
pub enum ReachError {
    #[error("contract {0} missing from the project model")]
    MissingContract(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Check every plan step: traverse to the step's target, collect the path
/// predicates, and decide satisfiability. `Sat` and `Unknown` pass the step
/// (optimistic on `Unknown`); `Unsat` across every enumerated alternate path
/// marks the plan unreachable at that step. An empty plan is vacuously
/// reachable.
pub fn check_path_reachability(
    steps: &[TxStep],
    _env: &ExecutionEnv,
    model: &ProjectModel,
    traverse_config: &TraverseConfig,
    solver_config: &SolverConfig,
) -> Result<Reachability, ReachError> {
    let mut step_models = Vec::new();
    for (index, step) in steps.iter().enumerate() {
        let contract = model
            .contract(&step.contract)
            .ok_or_else(|| ReachError::MissingContract(step.contract.clone()))?;
        let entry = model
            .resolve_function(contract, &step.function)
            .map(|(_, f)| f)
            .ok_or_else(|| {
                ReachError::Frontend(FrontendError::MissingFunction(
                    step.contract.clone(),
                    step.function.clone(),
                ))
            })?;

        let paths = match traverse_paths(
            model,
            &step.contract,
            &step.function,
            &step.target,
            &step.params,
            traverse_config,
        ) {
            Ok(paths) => paths,
            Err(FrontendError::NoPath) => {
                return Ok(Reachability::Unreachable {
                    step: index,
                    witness: format!(
                        "no syntactic path from {}.{} to {:?}",
                        step.contract, step.function, step.target
                    ),
                });
            }
            // a blown depth limit is conservatively reachable
            Err(FrontendError::DepthExceeded) => {
                step_models.push(StepModel {
                    step: index,
                    hops: vec![step.function.clone()],
                    model: BTreeMap::new(),
                    unknown_reason: Some("traversal depth limit exceeded".into()),
                    predicates: Vec::new(),
                });
                continue;
            }
            Err(e) => return Err(e.into()),
        };

        let mut unsat_witness = String::new();
        let mut decided = None;
        for path in &paths {
            let (guards, symbols) = collect_predicates(model, path, &step.params)?;
            let mut predicates: Vec<_> = guards.iter().map(|g| g.condition.clone()).collect();
            predicates.extend(sigma_constraints(entry, &step.params, &symbols));
            let rendered: Vec<String> = predicates.iter().map(|p| p.render()).collect();
            match check_sat(&predicates, &symbols, solver_config)? {
                SatResult::Sat(assignment) => {
                    decided = Some(StepModel {
                        step: index,
                        hops: path.hops.clone(),
                        model: assignment,
                        unknown_reason: None,
                        predicates: rendered,
                    });
                    break;
                }
                SatResult::Unknown(reason) => {
                    decided = Some(StepModel {
                        step: index,
                        hops: path.hops.clone(),
                        model: BTreeMap::new(),
                        unknown_reason: Some(reason),
                        predicates: rendered,
                    });
                    break;
                }
                SatResult::Unsat => {
                    unsat_witness = format!(
                        "unsatisfiable path constraints via ⟨{}⟩: {}",
                        path.hops.join(", "),
                        rendered.join(" ∧ ")
                    );
                }
            }
        }
        match decided {
            Some(step_model) => step_models.push(step_model),
            None => {
                return Ok(Reachability::Unreachable {
                    step: index,
                    witness: unsat_witness,
                });
            }
        }
    }
    Ok(Reachability::Reachable { steps: step_models })
}
