//! Relevance oracle trait and the scripted transcript implementation.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::ontology::HkgNode;
use crate::oracle::OracleError;

use super::types::{ContractContext, RelevanceVerdict};

/// Judges whether a candidate node is relevant to the contract context.
pub trait RelevanceOracle {
    fn assess(
        &mut self,
        ctx: &ContractContext,
        candidate: &HkgNode,
    ) -> Result<RelevanceVerdict, OracleError>;
}

/// One transcript line: a candidate-id pattern with its canned verdict.
///
/// Patterns are exact node ids, or prefixes ending in `*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelevanceEntry {
    #[serde(rename = "match")]
    pub pattern: String,
    pub keep: bool,
    #[serde(default)]
    pub confidence: f64,
    #[serde(default)]
    pub rationale: String,
}

impl RelevanceEntry {
    pub fn keep(pattern: &str) -> Self {
        RelevanceEntry {
            pattern: pattern.into(),
            keep: true,
            confidence: 0.9,
            rationale: format!("scripted accept of {pattern}"),
        }
    }

    fn matches(&self, id: &str) -> bool {
        match self.pattern.strip_suffix('*') {
            Some(prefix) => id.starts_with(prefix),
            None => self.pattern == id,
        }
    }
}

/// Replays a transcript in order. A queried candidate that does not match
/// the next entry gets the default reject verdict and the entry stays put,
/// so transcripts only need to list the accepts (in evaluation order).
#[derive(Debug, Default)]
pub struct ScriptedRelevanceOracle {
    entries: VecDeque<RelevanceEntry>,
    pub queries: usize,
}

impl ScriptedRelevanceOracle {
    pub fn new(entries: Vec<RelevanceEntry>) -> Self {
        ScriptedRelevanceOracle {
            entries: entries.into(),
            queries: 0,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, OracleError> {
        let entries: Vec<RelevanceEntry> =
            serde_json::from_str(text).map_err(|e| OracleError::Schema(e.to_string()))?;
        Ok(Self::new(entries))
    }

    /// Convenience: accept exactly these ids, in this order.
    pub fn accepting(ids: &[&str]) -> Self {
        Self::new(ids.iter().map(|id| RelevanceEntry::keep(id)).collect())
    }

    pub fn remaining(&self) -> usize {
        self.entries.len()
    }
}

impl RelevanceOracle for ScriptedRelevanceOracle {
    fn assess(
        &mut self,
        _ctx: &ContractContext,
        candidate: &HkgNode,
    ) -> Result<RelevanceVerdict, OracleError> {
        self.queries += 1;
        if let Some(front) = self.entries.front() {
            if front.matches(candidate.id.as_str()) {
                let entry = self.entries.pop_front().expect("front exists");
                return Ok(RelevanceVerdict {
                    keep: entry.keep,
                    confidence: entry.confidence,
                    rationale: entry.rationale,
                });
            }
        }
        Ok(RelevanceVerdict::reject("default-reject"))
    }
}

/// Accepts everything; handy for structural tests.
#[derive(Debug, Default)]
pub struct AcceptAll {
    pub queries: usize,
}

impl RelevanceOracle for AcceptAll {
    fn assess(
        &mut self,
        _ctx: &ContractContext,
        candidate: &HkgNode,
    ) -> Result<RelevanceVerdict, OracleError> {
        self.queries += 1;
        Ok(RelevanceVerdict {
            keep: true,
            confidence: 1.0,
            rationale: format!("accept {}", candidate.id),
        })
    }
}

/// Rejects everything.
#[derive(Debug, Default)]
pub struct RejectAll {
    pub queries: usize,
}

impl RelevanceOracle for RejectAll {
    fn assess(
        &mut self,
        _ctx: &ContractContext,
        _candidate: &HkgNode,
    ) -> Result<RelevanceVerdict, OracleError> {
        self.queries += 1;
        Ok(RelevanceVerdict::reject("scripted reject"))
    }
}
