//! Call-path traversal toward a target operation.

use serde::{Deserialize, Serialize};

use super::ast::{ProjectModel, SourceLoc};
use super::predicates::{SigmaBindings, Walker};
use super::FrontendError;

/// Statement class a plan step wants to reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetCategory {
    StateModification,
    ExternalCall,
    FundTransfer,
}

/// Target operation: a category plus an optional sink hint naming the exact
/// function or state variable to reach.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetOp {
    pub category: TargetCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<String>,
}

impl TargetOp {
    pub fn new(category: TargetCategory) -> Self {
        TargetOp {
            category,
            sink: None,
        }
    }

    pub fn with_sink(category: TargetCategory, sink: impl Into<String>) -> Self {
        TargetOp {
            category,
            sink: Some(sink.into()),
        }
    }
}

/// An ordered call sequence from an entry function to a sink statement,
/// with the branch decisions pinned so the walk can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CallPath {
    pub contract: String,
    pub entry: String,
    pub target: TargetOp,
    /// Functions and modifiers in entry order, sink callee last when the
    /// sink is an internal call.
    pub hops: Vec<String>,
    /// Fork decisions (branch/loop choices) identifying this route.
    pub route: Vec<usize>,
    pub sink_description: String,
    pub sink_loc: SourceLoc,
}

#[derive(Debug, Clone)]
pub struct TraverseConfig {
    /// Maximum call-inlining depth.
    pub depth_limit: usize,
    /// Maximum alternate statement-level routes enumerated.
    pub max_paths: usize,
}

impl Default for TraverseConfig {
    fn default() -> Self {
        TraverseConfig {
            depth_limit: 8,
            max_paths: 16,
        }
    }
}

/// First path from `entry` whose final statement matches the target.
pub fn traverse(
    model: &ProjectModel,
    contract: &str,
    entry: &str,
    target: &TargetOp,
    config: &TraverseConfig,
) -> Result<CallPath, FrontendError> {
    let paths = traverse_paths(model, contract, entry, target, &SigmaBindings::new(), config)?;
    Ok(paths.into_iter().next().expect("traverse_paths is non-empty on Ok"))
}

/// Up to `config.max_paths` distinct routes to the target, in route order
/// (then-branches and skipped loops first).
pub fn traverse_paths(
    model: &ProjectModel,
    contract: &str,
    entry: &str,
    target: &TargetOp,
    sigma: &SigmaBindings,
    config: &TraverseConfig,
) -> Result<Vec<CallPath>, FrontendError> {
    let contract_def = model
        .contract(contract)
        .ok_or_else(|| FrontendError::MissingContract(contract.to_string()))?;
    let (owner, entry_def) = model
        .resolve_function(contract_def, entry)
        .ok_or_else(|| FrontendError::MissingFunction(contract.to_string(), entry.to_string()))?;
    if !entry_def.visibility.is_externally_callable() {
        return Err(FrontendError::EntryNotCallable(entry.to_string()));
    }
    let _ = owner;

    let mut paths = Vec::new();
    let mut prefix: Vec<usize> = Vec::new();
    let mut depth_exceeded = false;
    loop {
        let walker = Walker::new(model, contract_def, target, sigma, config, prefix.clone());
        let outcome = walker.run(entry_def);
        depth_exceeded |= outcome.depth_exceeded;
        if let Some(sink) = outcome.sink {
            paths.push(CallPath {
                contract: contract.to_string(),
                entry: entry.to_string(),
                target: target.clone(),
                hops: outcome.hops,
                route: outcome.decisions.iter().map(|(c, _)| *c).collect(),
                sink_description: sink.description,
                sink_loc: sink.loc,
            });
            if paths.len() >= config.max_paths {
                break;
            }
        }
        // advance to the next route in depth-first order
        let mut next = outcome.decisions;
        loop {
            match next.pop() {
                Some((choice, options)) if choice + 1 < options => {
                    next.push((choice + 1, options));
                    break;
                }
                Some(_) => continue,
                None => {
                    if paths.is_empty() {
                        return Err(if depth_exceeded {
                            FrontendError::DepthExceeded
                        } else {
                            FrontendError::NoPath
                        });
                    }
                    return Ok(paths);
                }
            }
        }
        prefix = next.iter().map(|(c, _)| *c).collect();
    }
    Ok(paths)
}
