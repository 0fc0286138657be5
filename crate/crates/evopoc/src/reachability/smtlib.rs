//! Optional external-solver bridge: QF_LIA export and model parsing.
//!
//! Map reads are lowered to fresh constants named by their rendering; symbol
//! names with punctuation are `|`-quoted. The model parser accepts the
//! standard `(model (define-fun name () Sort value) ...)` response shape.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_bigint::BigUint;

use super::expr::{BinOp, Expr, Sort, SymbolTable, UnOp, Value};

fn quote(name: &str) -> String {
    let plain = name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '.' | '-'));
    if plain && !name.is_empty() {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn sort_text(sort: Sort) -> &'static str {
    match sort {
        Sort::Bool => "Bool",
        _ => "Int",
    }
}

fn render(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(v) => write!(out, "{v}").unwrap(),
        Expr::Bool(b) => write!(out, "{b}").unwrap(),
        Expr::Sym(name) => out.push_str(&quote(name)),
        Expr::MapRead { .. } => out.push_str(&quote(&e.render())),
        Expr::Unary {
            op: UnOp::Not,
            operand,
        } => {
            out.push_str("(not ");
            render(operand, out);
            out.push(')');
        }
        Expr::Binary { op, left, right } => {
            let text = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "div",
                BinOp::Eq => "=",
                BinOp::Ne => "distinct",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
                BinOp::And => "and",
                BinOp::Or => "or",
            };
            write!(out, "({text} ").unwrap();
            render(left, out);
            out.push(' ');
            render(right, out);
            out.push(')');
        }
    }
}

/// Export a conjunction as an SMT-LIB 2 script over QF_LIA.
pub fn to_smtlib(predicates: &[Expr], symbols: &SymbolTable) -> String {
    let mut out = String::new();
    out.push_str("(set-logic QF_LIA)\n");

    // declared symbols, then lowered map-read constants
    let mut declared: BTreeMap<String, Sort> = BTreeMap::new();
    for (name, info) in symbols.iter() {
        declared.insert(name.clone(), info.sort);
    }
    fn collect_reads(e: &Expr, out: &mut BTreeMap<String, Sort>) {
        match e {
            Expr::MapRead { value_sort, .. } => {
                out.insert(e.render(), *value_sort);
            }
            Expr::Unary { operand, .. } => collect_reads(operand, out),
            Expr::Binary { left, right, .. } => {
                collect_reads(left, out);
                collect_reads(right, out);
            }
            _ => {}
        }
    }
    for p in predicates {
        collect_reads(p, &mut declared);
    }

    for (name, sort) in &declared {
        writeln!(out, "(declare-const {} {})", quote(name), sort_text(*sort)).unwrap();
        if sort.is_numeric() {
            writeln!(out, "(assert (>= {} 0))", quote(name)).unwrap();
        }
        if let Some(info) = symbols.get(name) {
            if let Some(width) = info.width {
                let bound = BigUint::from(1u8) << width;
                writeln!(out, "(assert (< {} {bound}))", quote(name)).unwrap();
            }
        }
    }
    for p in predicates {
        out.push_str("(assert ");
        render(p, &mut out);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

/// Parse a `(model …)` / `((name value) …)` response into symbol values.
pub fn parse_smtlib_model(text: &str) -> BTreeMap<String, Value> {
    #[derive(Debug)]
    enum SExp {
        Atom(String),
        List(Vec<SExp>),
    }

    fn tokenize(text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '(' | ')' => tokens.push(c.to_string()),
                '|' => {
                    let mut name = String::new();
                    for q in chars.by_ref() {
                        if q == '|' {
                            break;
                        }
                        name.push(q);
                    }
                    tokens.push(name);
                }
                ';' => {
                    for q in chars.by_ref() {
                        if q == '\n' {
                            break;
                        }
                    }
                }
                c if c.is_whitespace() => {}
                c => {
                    let mut atom = String::from(c);
                    while let Some(&n) = chars.peek() {
                        if n.is_whitespace() || n == '(' || n == ')' {
                            break;
                        }
                        atom.push(n);
                        chars.next();
                    }
                    tokens.push(atom);
                }
            }
        }
        tokens
    }

    fn parse(tokens: &[String], pos: &mut usize) -> Option<SExp> {
        if *pos >= tokens.len() {
            return None;
        }
        let tok = &tokens[*pos];
        *pos += 1;
        if tok == "(" {
            let mut items = Vec::new();
            while *pos < tokens.len() && tokens[*pos] != ")" {
                items.push(parse(tokens, pos)?);
            }
            *pos += 1; // closing paren
            Some(SExp::List(items))
        } else if tok == ")" {
            None
        } else {
            Some(SExp::Atom(tok.clone()))
        }
    }

    fn atom_value(e: &SExp) -> Option<Value> {
        match e {
            SExp::Atom(a) => match a.as_str() {
                "true" => Some(Value::Bool(true)),
                "false" => Some(Value::Bool(false)),
                n => BigUint::parse_bytes(n.as_bytes(), 10).map(Value::Int),
            },
            // negative numerals arrive as (- 5); clamp to the non-negative
            // domain the engine works in
            SExp::List(items) => match items.as_slice() {
                [SExp::Atom(minus), SExp::Atom(_)] if minus == "-" => Some(Value::zero()),
                _ => None,
            },
        }
    }

    let tokens = tokenize(text);
    let mut pos = 0;
    let mut model = BTreeMap::new();
    while let Some(exp) = parse(&tokens, &mut pos) {
        let SExp::List(items) = exp else { continue };
        // unwrap optional leading `model` keyword
        let entries: &[SExp] = match items.first() {
            Some(SExp::Atom(a)) if a == "model" => &items[1..],
            _ => &items[..],
        };
        for entry in entries {
            let SExp::List(parts) = entry else { continue };
            match parts.as_slice() {
                // (define-fun name () Sort value)
                [SExp::Atom(kw), SExp::Atom(name), SExp::List(_), SExp::Atom(_), value]
                    if kw == "define-fun" =>
                {
                    if let Some(v) = atom_value(value) {
                        model.insert(name.clone(), v);
                    }
                }
                // ((name value)) pairs
                [SExp::Atom(name), value] => {
                    if let Some(v) = atom_value(value) {
                        model.insert(name.clone(), v);
                    }
                }
                _ => {}
            }
        }
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reachability::expr::SymbolOwner;

    #[test]
    fn export_declares_all_symbols_and_lowers_map_reads() {
        let mut symbols = SymbolTable::new();
        symbols.declare("len(R)", Sort::Len, SymbolOwner::Attacker);
        symbols.declare("h", Sort::Int, SymbolOwner::Attacker);
        let read = Expr::MapRead {
            map: "txHashes".into(),
            keys: vec![Expr::sym("h")],
            value_sort: Sort::Bool,
        };
        let predicates = vec![
            Expr::eq(Expr::sym("len(R)"), Expr::int(0)),
            Expr::not(read),
        ];
        let script = to_smtlib(&predicates, &symbols);
        assert!(script.contains("(set-logic QF_LIA)"));
        assert!(script.contains("(declare-const |len(R)| Int)"));
        assert!(script.contains("(declare-const |txHashes[h]| Bool)"));
        assert!(script.contains("(assert (>= |len(R)| 0))"));
        assert!(script.contains("(assert (not |txHashes[h]|))"));
        assert!(script.trim_end().ends_with("(get-model)"));
    }

    #[test]
    fn model_response_round_trips() {
        let response = r#"
            sat
            (model
              (define-fun |len(R)| () Int 0)
              (define-fun h () Int 7)
              (define-fun |txHashes[h]| () Bool false)
            )
        "#;
        let model = parse_smtlib_model(response);
        assert_eq!(model["len(R)"], Value::Int(0u32.into()));
        assert_eq!(model["h"], Value::Int(7u32.into()));
        assert_eq!(model["txHashes[h]"], Value::Bool(false));

        // bare pair shape
        let model = parse_smtlib_model("((x 3) (flag true))");
        assert_eq!(model["x"], Value::Int(3u32.into()));
        assert_eq!(model["flag"], Value::Bool(true));
    }
}
