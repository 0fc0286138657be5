//! Exploit-feasibility engine for DeFi smart contracts.
//!
//! The crate is organized around a three-layer hierarchical knowledge graph
//! (contract semantics, failure modes, exploit primitives) that serves as
//! long-term memory, and a validation pipeline that checks candidate exploit
//! plans on two axes before a proof-of-concept test file is emitted:
//!
//! 1. **Reachability** — guard predicates collected along the call path are
//!    encoded as constraints over attacker-controlled symbols and checked for
//!    satisfiability ([`reachability`]).
//! 2. **Profitability** — the exploit script is replayed against an abstract
//!    asset state (balances plus AMM reserves) and must realize a positive
//!    net wealth change ([`profitability`]).
//!
//! The reasoning backend (plan/script generation, relevance judgments) is
//! pluggable; deterministic scripted providers back every test path, and a
//! generic chat-completion HTTP client is available for live use ([`oracle`]).

pub mod config;
#[cfg(test)]
pub(crate) mod testutil;
pub mod frontend;
pub mod fusion;
pub mod memory;
pub mod ontology;
pub mod oracle;
pub mod pipeline;
pub mod profitability;
pub mod reachability;
