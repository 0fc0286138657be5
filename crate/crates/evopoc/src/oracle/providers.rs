//! Backend-driven implementations of the engine's oracle traits, with the
//! schema validation layer between raw payloads and the pipeline.

use serde::Deserialize;
use serde_json::Value;

use crate::memory::{ContractContext, RelevanceOracle, RelevanceVerdict, WorkingMemory};
use crate::ontology::HkgNode;
use crate::pipeline::{ExecutionEnv, ExploitPlan, PlanOracle, ScriptBundle};
use crate::profitability::AssetOp;

use super::backend::{BackendRequest, Message, OracleError, ReasoningBackend, SchemaTag};

/// Plan payload schema: `{steps: [...]}` matching the plan-file format.
#[derive(Debug, Deserialize)]
pub struct PlanResponse {
    pub steps: Vec<crate::pipeline::TxStep>,
}

/// Script payload schema: optional per-step PoC fragments and the per-step
/// asset-op projection.
#[derive(Debug, Deserialize)]
pub struct ScriptResponse {
    #[serde(default)]
    pub fragments: Vec<Option<String>>,
    pub projection: Vec<Vec<AssetOp>>,
}

/// Plan/script oracle over any reasoning backend.
pub struct BackendPlanOracle<B: ReasoningBackend> {
    backend: B,
}

impl<B: ReasoningBackend> BackendPlanOracle<B> {
    pub fn new(backend: B) -> Self {
        BackendPlanOracle { backend }
    }

    pub fn into_inner(self) -> B {
        self.backend
    }
}

impl<B: ReasoningBackend> PlanOracle for BackendPlanOracle<B> {
    fn generate_plan(
        &mut self,
        wm: &WorkingMemory,
        diagnostics: &[crate::pipeline::IterationDiagnostic],
    ) -> Result<ExploitPlan, OracleError> {
        let request = BackendRequest::new(
            SchemaTag::Plan,
            vec![
                Message::system(
                    "Produce an exploit plan as JSON {\"steps\": [{contract, function, \
                     params, target, phase, nodes?}]} grounded in the working memory.",
                ),
                Message::user(
                    serde_json::json!({
                        "working_memory": wm.summary_json(),
                        "diagnostics": diagnostics,
                    })
                    .to_string(),
                ),
            ],
        );
        let response = self.backend.chat(&request)?;
        let parsed: PlanResponse = serde_json::from_value(response.payload)
            .map_err(|e| OracleError::Schema(format!("plan payload: {e}")))?;
        let plan = ExploitPlan {
            steps: parsed.steps,
        };
        plan.validate()
            .map_err(|e| OracleError::Schema(format!("plan validation: {e}")))?;

        // node references must be grounded in the working memory; an empty
        // memory (scripted runs) bypasses grounding, logged
        let accepted = wm.all_accepted();
        if accepted.is_empty() {
            if plan.steps.iter().any(|s| !s.nodes.is_empty()) {
                log::warn!("plan carries node references but working memory is empty; accepted as scripted input");
            }
        } else {
            for step in &plan.steps {
                for node in &step.nodes {
                    if !accepted.contains(node) {
                        return Err(OracleError::Schema(format!(
                            "plan references node {node} absent from working memory"
                        )));
                    }
                }
            }
        }
        Ok(plan)
    }

    fn generate_script(
        &mut self,
        plan: &ExploitPlan,
        env: &ExecutionEnv,
    ) -> Result<ScriptBundle, OracleError> {
        let request = BackendRequest::new(
            SchemaTag::Script,
            vec![
                Message::system(
                    "Instantiate the plan as JSON {\"fragments\": [...], \
                     \"projection\": [[asset ops]]} against the execution environment.",
                ),
                Message::user(
                    serde_json::json!({
                        "plan": plan,
                        "env": env,
                    })
                    .to_string(),
                ),
            ],
        );
        let response = self.backend.chat(&request)?;
        let parsed: ScriptResponse = serde_json::from_value(response.payload)
            .map_err(|e| OracleError::Schema(format!("script payload: {e}")))?;
        validate_projection(&parsed.projection, env)?;
        let mut fragments = parsed.fragments;
        fragments.resize(plan.steps.len(), None);
        Ok(ScriptBundle {
            step_fragments: fragments,
            projection: parsed.projection,
        })
    }
}

/// Projection ops may only reference tokens and pools the environment knows.
fn validate_projection(projection: &[Vec<AssetOp>], env: &ExecutionEnv) -> Result<(), OracleError> {
    let known_token = |token: &str| env.tokens.iter().any(|t| t == token);
    let known_pool = |pool: &str| env.pools.iter().any(|p| p.id == pool);
    for ops in projection {
        for op in ops {
            let (tokens, pools): (Vec<&str>, Vec<&str>) = match op {
                AssetOp::Mint { token, .. }
                | AssetOp::Burn { token, .. }
                | AssetOp::Transfer { token, .. }
                | AssetOp::Approve { token, .. }
                | AssetOp::FlashBorrow { token, .. }
                | AssetOp::FlashRepay { token, .. }
                | AssetOp::ReleaseRetained { token, .. } => (vec![token.as_str()], vec![]),
                AssetOp::SwapExactIn {
                    pool, token_in, ..
                } => (vec![token_in.as_str()], vec![pool.as_str()]),
                AssetOp::Skim { pool, .. } | AssetOp::Sync { pool } => {
                    (vec![], vec![pool.as_str()])
                }
            };
            for token in tokens {
                if !known_token(token) {
                    return Err(OracleError::Schema(format!(
                        "projection references unknown token `{token}`"
                    )));
                }
            }
            for pool in pools {
                if !known_pool(pool) {
                    return Err(OracleError::Schema(format!(
                        "projection references unknown pool `{pool}`"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Relevance oracle over a reasoning backend.
pub struct BackendRelevanceOracle<B: ReasoningBackend> {
    backend: B,
}

impl<B: ReasoningBackend> BackendRelevanceOracle<B> {
    pub fn new(backend: B) -> Self {
        BackendRelevanceOracle { backend }
    }
}

#[derive(Debug, Deserialize)]
struct RelevancePayload {
    keep: bool,
    #[serde(default)]
    confidence: f64,
    #[serde(default)]
    rationale: String,
}

impl<B: ReasoningBackend> RelevanceOracle for BackendRelevanceOracle<B> {
    fn assess(
        &mut self,
        ctx: &ContractContext,
        candidate: &HkgNode,
    ) -> Result<RelevanceVerdict, OracleError> {
        let request = BackendRequest::new(
            SchemaTag::Relevance,
            vec![
                Message::system(
                    "Judge whether the candidate knowledge node is relevant to the \
                     contract. Reply as JSON {keep, confidence, rationale}.",
                ),
                Message::user(format!(
                    "contract summary: {}\ncandidate: {} ({:?}/{:?})\ndescription: {}",
                    ctx.summary, candidate.id, candidate.layer, candidate.kind,
                    candidate.description
                )),
            ],
        );
        let response = self.backend.chat(&request)?;
        let parsed: RelevancePayload = serde_json::from_value(response.payload)
            .map_err(|e| OracleError::Schema(format!("relevance payload: {e}")))?;
        Ok(RelevanceVerdict {
            keep: parsed.keep,
            confidence: parsed.confidence,
            rationale: parsed.rationale,
        })
    }
}

/// Free function mirroring the backend surface for one-off calls.
pub fn chat(
    backend: &mut dyn ReasoningBackend,
    request: &BackendRequest,
) -> Result<super::backend::BackendResponse, OracleError> {
    backend.chat(request)
}

#[allow(unused)]
fn _assert_payload_is_value(v: Value) -> Value {
    v
}
