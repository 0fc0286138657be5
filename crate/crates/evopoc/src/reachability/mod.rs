//! Stage-1 validation: guard predicates become constraints over
//! attacker-controlled symbols and are decided for satisfiability.
//!
//! The shipped decision procedure covers quantifier-free conjunctions of
//! linear integer arithmetic over non-negative integers, boolean structure,
//! equality, and map reads with syntactic key consistency. Anything outside
//! that fragment answers `Unknown`, never `Unsat` — an unsatisfiable verdict
//! must always be trustworthy enough to prune a plan. An external SMT-LIB
//! process can be wired behind the same contract.

mod expr;
mod reach;
mod smtlib;
mod solver;

pub use expr::{eval, BinOp, Expr, Sort, SymbolInfo, SymbolOwner, SymbolTable, UnOp, Value};
pub use reach::{check_path_reachability, ReachError, Reachability, StepModel};
pub use smtlib::{parse_smtlib_model, to_smtlib};
pub use solver::{check_sat, SatResult, SolverConfig, SolverError};
