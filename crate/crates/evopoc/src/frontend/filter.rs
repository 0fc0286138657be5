//! Candidate filtering: drop test code and trusted libraries, then keep the
//! contracts reachable from externally visible entry points.

use std::collections::BTreeSet;

use super::ast::{ContractDef, ContractKind, Expr, ProjectModel, Statement, TypeTag};

#[derive(Debug, Clone, Default)]
pub struct FilterConfig {
    /// Path globs for trusted libraries (`*` wildcards), e.g. `lib/*`,
    /// `*openzeppelin*`.
    pub trusted_globs: Vec<String>,
}

fn glob_match(pattern: &str, text: &str) -> bool {
    // '*' wildcards only; enough for path conventions
    let parts: Vec<&str> = pattern.split('*').collect();
    let mut rest = text;
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        match rest.find(part) {
            Some(idx) => {
                if i == 0 && idx != 0 {
                    return false;
                }
                rest = &rest[idx + part.len()..];
            }
            None => return false,
        }
    }
    if let Some(last) = parts.last() {
        if !last.is_empty() && !pattern.ends_with('*') && !text.ends_with(last) {
            return false;
        }
    }
    true
}

fn is_test_path(path: &str) -> bool {
    let normalized = path.replace('\\', "/");
    normalized.ends_with(".t.sol")
        || normalized.split('/').any(|seg| seg == "test" || seg == "tests")
}

/// Contract names referenced by a contract's code and declarations.
fn referenced_contracts(contract: &ContractDef, known: &BTreeSet<String>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for parent in &contract.parents {
        if known.contains(parent) {
            out.insert(parent.clone());
        }
    }
    fn note_ty(ty: &TypeTag, known: &BTreeSet<String>, out: &mut BTreeSet<String>) {
        if let TypeTag::Named(name) = ty {
            if known.contains(name) {
                out.insert(name.clone());
            }
        }
    }
    for v in &contract.state_vars {
        note_ty(&v.ty, known, &mut out);
    }

    fn walk_expr(e: &Expr, known: &BTreeSet<String>, out: &mut BTreeSet<String>) {
        match e {
            Expr::Ident(name) => {
                if known.contains(name) {
                    out.insert(name.clone());
                }
            }
            Expr::Cast { ty, expr } => {
                if let TypeTag::Named(name) = ty {
                    if known.contains(name) {
                        out.insert(name.clone());
                    }
                }
                walk_expr(expr, known, out);
            }
            Expr::New { ty, args } => {
                if let TypeTag::Named(name) = ty {
                    if known.contains(name) {
                        out.insert(name.clone());
                    }
                }
                for a in args {
                    walk_expr(a, known, out);
                }
            }
            Expr::Member { base, .. } => walk_expr(base, known, out),
            Expr::Index { base, index } => {
                walk_expr(base, known, out);
                walk_expr(index, known, out);
            }
            Expr::Call { callee, args } => {
                walk_expr(callee, known, out);
                for a in args {
                    walk_expr(a, known, out);
                }
            }
            Expr::Unary { operand, .. } => walk_expr(operand, known, out),
            Expr::Binary { left, right, .. } => {
                walk_expr(left, known, out);
                walk_expr(right, known, out);
            }
            _ => {}
        }
    }

    fn walk_stmts(stmts: &[Statement], known: &BTreeSet<String>, out: &mut BTreeSet<String>) {
        for s in stmts {
            match s {
                Statement::VarDecl { ty, init, .. } => {
                    if let TypeTag::Named(name) = ty {
                        if known.contains(name) {
                            out.insert(name.clone());
                        }
                    }
                    if let Some(e) = init {
                        walk_expr(e, known, out);
                    }
                }
                Statement::Assign { target, value, .. } => {
                    walk_expr(target, known, out);
                    walk_expr(value, known, out);
                }
                Statement::Require { condition, .. } | Statement::Assert { condition, .. } => {
                    walk_expr(condition, known, out)
                }
                Statement::If {
                    condition,
                    then_branch,
                    else_branch,
                    ..
                } => {
                    walk_expr(condition, known, out);
                    walk_stmts(then_branch, known, out);
                    walk_stmts(else_branch, known, out);
                }
                Statement::For {
                    init,
                    condition,
                    body,
                    ..
                } => {
                    if let Some(i) = init {
                        walk_stmts(std::slice::from_ref(i), known, out);
                    }
                    if let Some(c) = condition {
                        walk_expr(c, known, out);
                    }
                    walk_stmts(body, known, out);
                }
                Statement::While {
                    condition, body, ..
                } => {
                    walk_expr(condition, known, out);
                    walk_stmts(body, known, out);
                }
                Statement::Return { value: Some(e), .. } => walk_expr(e, known, out),
                Statement::Expr { expr, .. } => walk_expr(expr, known, out),
                Statement::Scope { body, .. } => walk_stmts(body, known, out),
                _ => {}
            }
        }
    }

    for m in &contract.modifiers {
        walk_stmts(&m.body, known, &mut out);
    }
    for f in &contract.functions {
        for p in &f.params {
            note_ty(&p.ty, known, &mut out);
        }
        if let Some(body) = &f.body {
            walk_stmts(body, known, &mut out);
        }
    }
    out.remove(&contract.name);
    out
}

/// Remove test files and trusted libraries, then prune to the contracts
/// reachable from externally visible functions of non-library contracts.
pub fn filter_candidates(model: &ProjectModel, config: &FilterConfig) -> ProjectModel {
    let surviving: Vec<&ContractDef> = model
        .contracts
        .iter()
        .filter(|c| {
            let path = &model.files[c.file];
            !is_test_path(path) && !config.trusted_globs.iter().any(|g| glob_match(g, path))
        })
        .collect();

    let known: BTreeSet<String> = surviving.iter().map(|c| c.name.clone()).collect();
    let seeds: Vec<&&ContractDef> = surviving
        .iter()
        .filter(|c| {
            c.kind != ContractKind::Library
                && c.kind != ContractKind::Interface
                && c.functions
                    .iter()
                    .any(|f| f.visibility.is_externally_callable())
        })
        .collect();

    let mut reachable: BTreeSet<String> = seeds.iter().map(|c| c.name.clone()).collect();
    let mut frontier: Vec<String> = reachable.iter().cloned().collect();
    while let Some(name) = frontier.pop() {
        let Some(contract) = surviving.iter().find(|c| c.name == name) else {
            continue;
        };
        for referenced in referenced_contracts(contract, &known) {
            if reachable.insert(referenced.clone()) {
                frontier.push(referenced);
            }
        }
    }

    ProjectModel {
        files: model.files.clone(),
        contracts: model
            .contracts
            .iter()
            .filter(|c| reachable.contains(&c.name))
            .cloned()
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_sources;

    const CORE: &str = r#"
        contract Vault {
            MathLib lib;
            function deposit(uint256 amount) external {
                uint256 shares = MathLib.toShares(amount);
                totalShares += shares;
            }
            uint256 totalShares;
        }
    "#;
    const LIB: &str = "library MathLib { function toShares(uint256 a) internal pure returns (uint256) { return a; } }";
    const ORPHAN: &str = "library Unused { function noop() internal pure {} }";
    const TEST: &str = "contract VaultTest { function test_deposit() external {} }";

    #[test]
    fn test_files_are_excluded() {
        let model = parse_sources(&[
            ("src/Vault.sol", CORE),
            ("src/MathLib.sol", LIB),
            ("test/Vault.t.sol", TEST),
        ])
        .unwrap();
        let filtered = filter_candidates(&model, &FilterConfig::default());
        let names: Vec<&str> = filtered.contracts.iter().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"Vault"));
        assert!(!names.contains(&"VaultTest"));
    }

    #[test]
    fn library_called_from_core_is_retained_but_orphans_are_not() {
        let model = parse_sources(&[
            ("src/Vault.sol", CORE),
            ("src/MathLib.sol", LIB),
            ("src/Unused.sol", ORPHAN),
        ])
        .unwrap();
        let filtered = filter_candidates(&model, &FilterConfig::default());
        let names: Vec<&str> = filtered.contracts.iter().map(|c| c.name.as_str()).collect();
        // oracle: brute-force reachability over the call graph
        assert_eq!(names, vec!["Vault", "MathLib"]);
    }

    #[test]
    fn all_trusted_yields_empty_model() {
        let model =
            parse_sources(&[("lib/MathLib.sol", LIB), ("lib/Unused.sol", ORPHAN)]).unwrap();
        let filtered = filter_candidates(
            &model,
            &FilterConfig {
                trusted_globs: vec!["lib/*".into()],
            },
        );
        assert!(filtered.contracts.is_empty(), "caller decides how to proceed");
    }
}
