//! Canonical source rendering of the model. `parse(unparse(parse(s)))` is
//! structurally equal to `parse(s)` over the supported subset.

use std::fmt::Write;

use super::ast::*;

pub fn unparse_project(model: &ProjectModel) -> String {
    let mut out = String::new();
    for contract in &model.contracts {
        unparse_contract(&mut out, contract);
        out.push('\n');
    }
    out
}

pub fn unparse_contract(out: &mut String, c: &ContractDef) {
    write!(out, "{} {}", c.kind, c.name).unwrap();
    if !c.parents.is_empty() {
        write!(out, " is {}", c.parents.join(", ")).unwrap();
    }
    out.push_str(" {\n");
    for v in &c.state_vars {
        write!(out, "    {} {} {}", v.ty, v.visibility, v.name).unwrap();
        if let Some(init) = &v.initializer {
            write!(out, " = {init}").unwrap();
        }
        out.push_str(";\n");
    }
    for m in &c.modifiers {
        write!(out, "    modifier {}({})", m.name, params(&m.params)).unwrap();
        out.push_str(" {\n");
        block(out, &m.body, 2);
        out.push_str("    }\n");
    }
    for fun in &c.functions {
        write!(out, "    function {}({})", fun.name, params(&fun.params)).unwrap();
        write!(out, " {}", fun.visibility).unwrap();
        if let Some(m) = &fun.mutability {
            write!(out, " {m}").unwrap();
        }
        for inv in &fun.modifiers {
            write!(out, " {}", inv.name).unwrap();
            if !inv.args.is_empty() {
                let rendered: Vec<String> = inv.args.iter().map(|a| a.to_string()).collect();
                write!(out, "({})", rendered.join(", ")).unwrap();
            }
        }
        if !fun.returns.is_empty() {
            write!(out, " returns ({})", params(&fun.returns)).unwrap();
        }
        match &fun.body {
            Some(body) => {
                out.push_str(" {\n");
                block(out, body, 2);
                out.push_str("    }\n");
            }
            None => out.push_str(";\n"),
        }
    }
    out.push_str("}\n");
}

fn params(list: &[Param]) -> String {
    list.iter()
        .map(|p| {
            let mut s = p.ty.to_string();
            if let Some(loc) = &p.location {
                s.push(' ');
                s.push_str(loc);
            }
            if !p.name.is_empty() {
                s.push(' ');
                s.push_str(&p.name);
            }
            s
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn block(out: &mut String, stmts: &[Statement], depth: usize) {
    for s in stmts {
        stmt(out, s, depth);
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn stmt(out: &mut String, s: &Statement, depth: usize) {
    indent(out, depth);
    match s {
        Statement::VarDecl {
            ty,
            location,
            name,
            init,
            ..
        } => {
            write!(out, "{ty}").unwrap();
            if let Some(l) = location {
                write!(out, " {l}").unwrap();
            }
            write!(out, " {name}").unwrap();
            if let Some(e) = init {
                write!(out, " = {e}").unwrap();
            }
            out.push_str(";\n");
        }
        Statement::Assign {
            target, op, value, ..
        } => {
            writeln!(out, "{target} {op} {value};").unwrap();
        }
        Statement::Require {
            condition, message, ..
        } => {
            match message {
                Some(m) => writeln!(out, "require({condition}, \"{m}\");").unwrap(),
                None => writeln!(out, "require({condition});").unwrap(),
            };
        }
        Statement::Assert { condition, .. } => {
            writeln!(out, "assert({condition});").unwrap();
        }
        Statement::If {
            condition,
            then_branch,
            else_branch,
            ..
        } => {
            writeln!(out, "if ({condition}) {{").unwrap();
            block(out, then_branch, depth + 1);
            indent(out, depth);
            if else_branch.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                block(out, else_branch, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        Statement::For {
            init,
            condition,
            update,
            body,
            ..
        } => {
            out.push_str("for (");
            if let Some(i) = init {
                let mut one = String::new();
                stmt(&mut one, i, 0);
                out.push_str(one.trim_end_matches('\n').trim_end_matches(';').trim_start());
            }
            out.push_str("; ");
            if let Some(c) = condition {
                write!(out, "{c}").unwrap();
            }
            out.push_str("; ");
            if let Some(u) = update {
                write!(out, "{u}").unwrap();
            }
            out.push_str(") {\n");
            block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        Statement::While {
            condition, body, ..
        } => {
            writeln!(out, "while ({condition}) {{").unwrap();
            block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        Statement::Return { value, .. } => match value {
            Some(v) => writeln!(out, "return {v};").unwrap(),
            None => out.push_str("return;\n"),
        },
        Statement::Revert { message, .. } => match message {
            Some(m) => writeln!(out, "revert(\"{m}\");").unwrap(),
            None => out.push_str("revert();\n"),
        },
        Statement::Expr { expr, .. } => {
            writeln!(out, "{expr};").unwrap();
        }
        Statement::Placeholder { .. } => out.push_str("_;\n"),
        Statement::Scope { body, .. } => {
            out.push_str("{\n");
            block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        Statement::Opaque { text, .. } => {
            writeln!(out, "{text}").unwrap();
        }
    }
}
