//! Solidity-subset frontend: parsing, candidate filtering, call-path
//! traversal, and guard-predicate extraction.
//!
//! The supported subset covers what exploit-path analysis needs — contracts,
//! state variables (including mappings), functions, modifiers,
//! require/assert, branches, loops over array lengths, internal calls, and
//! ERC-20-style external calls. `keccak256`/`ecrecover` and friends are
//! treated as opaque calls; unsupported constructs are kept as opaque
//! statements, never dropped.

pub mod ast;
mod filter;
mod lexer;
mod parser;
mod predicates;
mod traverse;
mod unparse;

use thiserror::Error;

pub use ast::{
    ContractDef, ContractKind, Expr, FunctionDef, ModifierDef, Param, ProjectModel, SourceLoc,
    StateVar, Statement, TypeTag, Visibility,
};
pub use filter::{filter_candidates, FilterConfig};
pub use parser::parse_project;
pub use predicates::{
    collect_predicates, sigma_constraints, Guard, GuardOrigin, SigmaBindings, SigmaValue,
};
pub use traverse::{traverse, traverse_paths, CallPath, TargetCategory, TargetOp, TraverseConfig};
pub use unparse::unparse_project;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("parse error in file {file} at {line}:{col}: {message}")]
    Parse {
        file: usize,
        line: u32,
        col: u32,
        message: String,
    },
    #[error("no contracts in the source set")]
    NoContracts,
    #[error("contract {0} not found in the model")]
    MissingContract(String),
    #[error("function {1} not found on contract {0}")]
    MissingFunction(String, String),
    #[error("entry {0} is not externally callable")]
    EntryNotCallable(String),
    #[error("no path from the entry to the target operation")]
    NoPath,
    #[error("call depth limit exceeded")]
    DepthExceeded,
    #[error("unsupported expression at {loc}: {what}")]
    UnsupportedExpression { loc: SourceLoc, what: String },
}

/// Parse in-memory sources given as (path, text) pairs.
pub fn parse_sources(sources: &[(&str, &str)]) -> Result<ProjectModel, FrontendError> {
    let owned: Vec<(String, String)> = sources
        .iter()
        .map(|(p, t)| (p.to_string(), t.to_string()))
        .collect();
    parse_project(&owned)
}

/// Read every `.sol` file under a directory (recursively) and parse it.
pub fn parse_dir(dir: &std::path::Path) -> Result<ProjectModel, FrontendError> {
    let mut sources = Vec::new();
    collect_sol_files(dir, &mut sources);
    sources.sort();
    let loaded: Vec<(String, String)> = sources
        .iter()
        .filter_map(|p| {
            std::fs::read_to_string(p)
                .ok()
                .map(|text| (p.display().to_string(), text))
        })
        .collect();
    parse_project(&loaded)
}

fn collect_sol_files(dir: &std::path::Path, out: &mut Vec<std::path::PathBuf>) {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return;
    };
    for entry in entries.flatten() {
        let path = entry.path();
        if path.is_dir() {
            collect_sol_files(&path, out);
        } else if path.extension().map_or(false, |e| e == "sol") {
            out.push(path);
        }
    }
}
