//! Sorted expression trees and model evaluation.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

/// Expression sort. `Addr` and `Len` behave as non-negative integers; the
/// distinction feeds symbol bookkeeping and rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Int,
    Bool,
    Addr,
    Len,
}

impl Sort {
    pub fn is_numeric(self) -> bool {
        !matches!(self, Sort::Bool)
    }
}

/// Who controls a symbol's value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolOwner {
    Attacker,
    ProtocolState,
    ExternalDefault,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolInfo {
    pub sort: Sort,
    pub owner: SymbolOwner,
    /// Declared bit width; adds an `x < 2^width` side constraint when set.
    pub width: Option<u32>,
}

/// Every symbol appearing in any expression must be declared here.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolTable {
    symbols: BTreeMap<String, SymbolInfo>,
}

impl SymbolTable {
    pub fn new() -> Self {
        SymbolTable::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, sort: Sort, owner: SymbolOwner) {
        self.symbols.entry(name.into()).or_insert(SymbolInfo {
            sort,
            owner,
            width: None,
        });
    }

    pub fn declare_with_width(
        &mut self,
        name: impl Into<String>,
        sort: Sort,
        owner: SymbolOwner,
        width: u32,
    ) {
        self.symbols.entry(name.into()).or_insert(SymbolInfo {
            sort,
            owner,
            width: Some(width),
        });
    }

    pub fn get(&self, name: &str) -> Option<&SymbolInfo> {
        self.symbols.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &SymbolInfo)> {
        self.symbols.iter()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    fn text(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Not,
}

/// Sorted expression tree over constants, symbols, and map reads.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(BigUint),
    Bool(bool),
    Sym(String),
    /// `mapName[k1][k2]…` with the value sort recorded at collection time.
    /// Syntactically equal reads denote the same value.
    MapRead {
        map: String,
        keys: Vec<Expr>,
        value_sort: Sort,
    },
    Unary {
        op: UnOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
}

impl Expr {
    pub fn int(v: u64) -> Expr {
        Expr::Int(BigUint::from(v))
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::Sym(name.into())
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary {
            op: UnOp::Not,
            operand: Box::new(e),
        }
    }

    pub fn bin(op: BinOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn eq(left: Expr, right: Expr) -> Expr {
        Expr::bin(BinOp::Eq, left, right)
    }

    /// Canonical rendering; also the lowering key for map reads.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Split a top-level conjunction into its conjuncts.
    pub fn split_conjuncts(self) -> Vec<Expr> {
        match self {
            Expr::Binary {
                op: BinOp::And,
                left,
                right,
            } => {
                let mut out = left.split_conjuncts();
                out.extend(right.split_conjuncts());
                out
            }
            other => vec![other],
        }
    }

    pub fn is_const_true(&self) -> bool {
        matches!(self, Expr::Bool(true))
    }

    pub fn is_const_false(&self) -> bool {
        matches!(self, Expr::Bool(false))
    }

    /// All symbol names referenced, map reads not included.
    pub fn symbols<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Sym(name) => out.push(name),
            Expr::MapRead { keys, .. } => {
                for k in keys {
                    k.symbols(out);
                }
            }
            Expr::Unary { operand, .. } => operand.symbols(out),
            Expr::Binary { left, right, .. } => {
                left.symbols(out);
                right.symbols(out);
            }
            _ => {}
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        fn prec(op: BinOp) -> u8 {
            match op {
                BinOp::Or => 1,
                BinOp::And => 2,
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
                BinOp::Add | BinOp::Sub => 4,
                BinOp::Mul | BinOp::Div => 5,
            }
        }
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Sym(name) => write!(f, "{name}"),
            Expr::MapRead { map, keys, .. } => {
                write!(f, "{map}")?;
                for k in keys {
                    write!(f, "[{k}]")?;
                }
                Ok(())
            }
            Expr::Unary { operand, .. } => {
                write!(f, "!")?;
                operand.fmt_prec(f, 8)
            }
            Expr::Binary { op, left, right } => {
                let p = prec(*op);
                if p < parent {
                    write!(f, "(")?;
                }
                left.fmt_prec(f, p)?;
                write!(f, " {} ", op.text())?;
                right.fmt_prec(f, p + 1)?;
                if p < parent {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// A concrete value in a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(BigUint),
    Bool(bool),
}

impl Value {
    pub fn zero() -> Value {
        Value::Int(BigUint::zero())
    }

    pub fn as_int(&self) -> Option<&BigUint> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Evaluate an expression under a model mapping symbol names (and canonical
/// map-read renderings) to values. Intermediate arithmetic is signed so
/// subtraction is total; `None` means the expression is undefined under the
/// model (missing assignment, division by zero, sort clash).
pub fn eval(expr: &Expr, model: &BTreeMap<String, Value>) -> Option<Value> {
    enum V {
        I(BigInt),
        B(bool),
    }
    fn go(expr: &Expr, model: &BTreeMap<String, Value>) -> Option<V> {
        match expr {
            Expr::Int(v) => Some(V::I(BigInt::from(v.clone()))),
            Expr::Bool(b) => Some(V::B(*b)),
            Expr::Sym(name) => match model.get(name)? {
                Value::Int(v) => Some(V::I(BigInt::from(v.clone()))),
                Value::Bool(b) => Some(V::B(*b)),
            },
            Expr::MapRead { .. } => match model.get(&expr.render())? {
                Value::Int(v) => Some(V::I(BigInt::from(v.clone()))),
                Value::Bool(b) => Some(V::B(*b)),
            },
            Expr::Unary { op: UnOp::Not, operand } => match go(operand, model)? {
                V::B(b) => Some(V::B(!b)),
                V::I(_) => None,
            },
            Expr::Binary { op, left, right } => {
                let l = go(left, model)?;
                let r = go(right, model)?;
                match (op, l, r) {
                    (BinOp::And, V::B(a), V::B(b)) => Some(V::B(a && b)),
                    (BinOp::Or, V::B(a), V::B(b)) => Some(V::B(a || b)),
                    (BinOp::Eq, V::B(a), V::B(b)) => Some(V::B(a == b)),
                    (BinOp::Ne, V::B(a), V::B(b)) => Some(V::B(a != b)),
                    (op, V::I(a), V::I(b)) => match op {
                        BinOp::Add => Some(V::I(a + b)),
                        BinOp::Sub => Some(V::I(a - b)),
                        BinOp::Mul => Some(V::I(a * b)),
                        BinOp::Div => {
                            if b.is_zero() {
                                None
                            } else {
                                Some(V::I(a / b))
                            }
                        }
                        BinOp::Eq => Some(V::B(a == b)),
                        BinOp::Ne => Some(V::B(a != b)),
                        BinOp::Lt => Some(V::B(a < b)),
                        BinOp::Le => Some(V::B(a <= b)),
                        BinOp::Gt => Some(V::B(a > b)),
                        BinOp::Ge => Some(V::B(a >= b)),
                        BinOp::And | BinOp::Or => None,
                    },
                    _ => None,
                }
            }
        }
    }
    match go(expr, model)? {
        V::B(b) => Some(Value::Bool(b)),
        V::I(v) => Some(Value::Int(v.to_biguint()?)),
    }
}

/// Evaluate a predicate to its truth value under a model.
pub(crate) fn eval_truth(expr: &Expr, model: &BTreeMap<String, Value>) -> Option<bool> {
    match eval(expr, model)? {
        Value::Bool(b) => Some(b),
        Value::Int(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_matches_paper_shapes() {
        let phi1 = Expr::eq(Expr::sym("len(R)"), Expr::sym("len(S)"));
        assert_eq!(phi1.render(), "len(R) = len(S)");
        let phi3 = Expr::not(Expr::MapRead {
            map: "txHashes".into(),
            keys: vec![Expr::sym("h")],
            value_sort: Sort::Bool,
        });
        assert_eq!(phi3.render(), "!txHashes[h]");
    }

    #[test]
    fn eval_over_model() {
        let mut model = BTreeMap::new();
        model.insert("x".to_string(), Value::Int(BigUint::from(7u32)));
        model.insert("txHashes[h]".to_string(), Value::Bool(false));
        let e = Expr::bin(BinOp::Gt, Expr::sym("x"), Expr::int(5));
        assert_eq!(eval_truth(&e, &model), Some(true));
        let m = Expr::not(Expr::MapRead {
            map: "txHashes".into(),
            keys: vec![Expr::sym("h")],
            value_sort: Sort::Bool,
        });
        // `h` itself is irrelevant: the read is looked up by rendering
        assert_eq!(eval_truth(&m, &model), Some(true));
        // subtraction may go negative in intermediates
        let sub = Expr::bin(
            BinOp::Lt,
            Expr::bin(BinOp::Sub, Expr::int(3), Expr::sym("x")),
            Expr::int(1),
        );
        assert_eq!(eval_truth(&sub, &model), Some(true));
    }

    #[test]
    fn conjunct_splitting() {
        let e = Expr::bin(
            BinOp::And,
            Expr::bin(BinOp::And, Expr::sym("a"), Expr::sym("b")),
            Expr::sym("c"),
        );
        let parts = e.split_conjuncts();
        assert_eq!(parts.len(), 3);
    }
}
