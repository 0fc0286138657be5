//! Structural model of the supported Solidity subset.
//!
//! The model keeps statements in source order and records anything outside
//! the subset as an opaque statement rather than dropping it.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SourceLoc {
    /// Index into [`ProjectModel::files`].
    pub file: usize,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeTag {
    Uint(u16),
    Int(u16),
    Bool,
    Address,
    Bytes(Option<u8>),
    Str,
    Array(Box<TypeTag>),
    Mapping(Box<TypeTag>, Box<TypeTag>),
    /// Contract, interface, or struct name.
    Named(String),
}

impl TypeTag {
    pub fn is_address_like(&self) -> bool {
        matches!(self, TypeTag::Address | TypeTag::Named(_))
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTag::Uint(256) => write!(f, "uint256"),
            TypeTag::Uint(bits) => write!(f, "uint{bits}"),
            TypeTag::Int(256) => write!(f, "int256"),
            TypeTag::Int(bits) => write!(f, "int{bits}"),
            TypeTag::Bool => write!(f, "bool"),
            TypeTag::Address => write!(f, "address"),
            TypeTag::Bytes(Some(n)) => write!(f, "bytes{n}"),
            TypeTag::Bytes(None) => write!(f, "bytes"),
            TypeTag::Str => write!(f, "string"),
            TypeTag::Array(inner) => write!(f, "{inner}[]"),
            TypeTag::Mapping(k, v) => write!(f, "mapping({k} => {v})"),
            TypeTag::Named(name) => write!(f, "{name}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    External,
    Public,
    Internal,
    Private,
}

impl Visibility {
    pub fn is_externally_callable(self) -> bool {
        matches!(self, Visibility::External | Visibility::Public)
    }
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Visibility::External => "external",
            Visibility::Public => "public",
            Visibility::Internal => "internal",
            Visibility::Private => "private",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeTag,
    /// memory/calldata/storage, kept for faithful unparse.
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVar {
    pub name: String,
    pub ty: TypeTag,
    pub visibility: Visibility,
    pub initializer: Option<Expr>,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifierInvocation {
    pub name: String,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Vec<Param>,
    pub visibility: Visibility,
    /// view / pure / payable, when stated.
    pub mutability: Option<String>,
    pub modifiers: Vec<ModifierInvocation>,
    /// `None` for bodyless declarations (interfaces).
    pub body: Option<Vec<Statement>>,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifierDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Statement>,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractKind {
    Contract,
    Interface,
    Library,
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ContractKind::Contract => "contract",
            ContractKind::Interface => "interface",
            ContractKind::Library => "library",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractDef {
    pub name: String,
    pub kind: ContractKind,
    pub parents: Vec<String>,
    pub state_vars: Vec<StateVar>,
    pub functions: Vec<FunctionDef>,
    pub modifiers: Vec<ModifierDef>,
    pub file: usize,
    pub loc: SourceLoc,
}

impl ContractDef {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn modifier(&self, name: &str) -> Option<&ModifierDef> {
        self.modifiers.iter().find(|m| m.name == name)
    }

    pub fn state_var(&self, name: &str) -> Option<&StateVar> {
        self.state_vars.iter().find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectModel {
    /// File paths, indexed by [`SourceLoc::file`] and [`ContractDef::file`].
    pub files: Vec<String>,
    pub contracts: Vec<ContractDef>,
}

impl ProjectModel {
    pub fn contract(&self, name: &str) -> Option<&ContractDef> {
        self.contracts.iter().find(|c| c.name == name)
    }

    pub fn origin(&self, contract: &ContractDef) -> &str {
        &self.files[contract.file]
    }

    /// Resolve a function by walking the contract and its parsed parents
    /// (single-parent resolution order: the contract itself, then parents in
    /// declaration order).
    pub fn resolve_function<'a>(
        &'a self,
        contract: &'a ContractDef,
        name: &str,
    ) -> Option<(&'a ContractDef, &'a FunctionDef)> {
        if let Some(f) = contract.function(name) {
            return Some((contract, f));
        }
        for parent in &contract.parents {
            if let Some(pc) = self.contract(parent) {
                if let Some(found) = self.resolve_function(pc, name) {
                    return Some(found);
                }
            }
        }
        None
    }

    pub fn resolve_modifier<'a>(
        &'a self,
        contract: &'a ContractDef,
        name: &str,
    ) -> Option<(&'a ContractDef, &'a ModifierDef)> {
        if let Some(m) = contract.modifier(name) {
            return Some((contract, m));
        }
        for parent in &contract.parents {
            if let Some(pc) = self.contract(parent) {
                if let Some(found) = self.resolve_modifier(pc, name) {
                    return Some(found);
                }
            }
        }
        None
    }

    pub fn resolve_state_var<'a>(
        &'a self,
        contract: &'a ContractDef,
        name: &str,
    ) -> Option<&'a StateVar> {
        if let Some(v) = contract.state_var(name) {
            return Some(v);
        }
        for parent in &contract.parents {
            if let Some(pc) = self.contract(parent) {
                if let Some(found) = self.resolve_state_var(pc, name) {
                    return Some(found);
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Assign,
    AddAssign,
    SubAssign,
}

impl fmt::Display for AssignOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AssignOp::Assign => "=",
            AssignOp::AddAssign => "+=",
            AssignOp::SubAssign => "-=",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    VarDecl {
        ty: TypeTag,
        location: Option<String>,
        name: String,
        init: Option<Expr>,
        loc: SourceLoc,
    },
    Assign {
        target: Expr,
        op: AssignOp,
        value: Expr,
        loc: SourceLoc,
    },
    Require {
        condition: Expr,
        message: Option<String>,
        loc: SourceLoc,
    },
    Assert {
        condition: Expr,
        loc: SourceLoc,
    },
    If {
        condition: Expr,
        then_branch: Vec<Statement>,
        else_branch: Vec<Statement>,
        loc: SourceLoc,
    },
    For {
        init: Option<Box<Statement>>,
        condition: Option<Expr>,
        /// Canonical text of the update clause; never interpreted.
        update: Option<String>,
        body: Vec<Statement>,
        loc: SourceLoc,
    },
    While {
        condition: Expr,
        body: Vec<Statement>,
        loc: SourceLoc,
    },
    Return {
        value: Option<Expr>,
        loc: SourceLoc,
    },
    Revert {
        message: Option<String>,
        loc: SourceLoc,
    },
    Expr {
        expr: Expr,
        loc: SourceLoc,
    },
    /// `_;` inside a modifier body.
    Placeholder { loc: SourceLoc },
    /// Plain `{ ... }` scope (also produced by `unchecked` blocks).
    Scope {
        body: Vec<Statement>,
        loc: SourceLoc,
    },
    /// Anything outside the subset, preserved verbatim.
    Opaque {
        text: String,
        loc: SourceLoc,
    },
}

impl Statement {
    pub fn loc(&self) -> SourceLoc {
        match self {
            Statement::VarDecl { loc, .. }
            | Statement::Assign { loc, .. }
            | Statement::Require { loc, .. }
            | Statement::Assert { loc, .. }
            | Statement::If { loc, .. }
            | Statement::For { loc, .. }
            | Statement::While { loc, .. }
            | Statement::Return { loc, .. }
            | Statement::Revert { loc, .. }
            | Statement::Expr { loc, .. }
            | Statement::Placeholder { loc }
            | Statement::Scope { loc, .. }
            | Statement::Opaque { loc, .. } => *loc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
}

impl BinOp {
    fn text(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
            BinOp::Pow => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(String),
    Bool(bool),
    Str(String),
    Ident(String),
    Member {
        base: Box<Expr>,
        member: String,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
    },
    Cast {
        ty: TypeTag,
        expr: Box<Expr>,
    },
    New {
        ty: TypeTag,
        args: Vec<Expr>,
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
    pub fn ident(name: impl Into<String>) -> Expr {
        Expr::Ident(name.into())
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        match self {
            Expr::Number(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Str(s) => write!(f, "\"{s}\""),
            Expr::Ident(name) => write!(f, "{name}"),
            Expr::Member { base, member } => {
                base.fmt_prec(f, 10)?;
                write!(f, ".{member}")
            }
            Expr::Index { base, index } => {
                base.fmt_prec(f, 10)?;
                write!(f, "[{index}]")
            }
            Expr::Call { callee, args } => {
                callee.fmt_prec(f, 10)?;
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Cast { ty, expr } => write!(f, "{ty}({expr})"),
            Expr::New { ty, args } => {
                write!(f, "new {ty}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Unary { op, operand } => {
                write!(f, "{}", if *op == UnOp::Not { "!" } else { "-" })?;
                operand.fmt_prec(f, 9)
            }
            Expr::Binary { op, left, right } => {
                let prec = op.precedence();
                let needs_parens = prec < parent;
                if needs_parens {
                    write!(f, "(")?;
                }
                left.fmt_prec(f, prec)?;
                write!(f, " {} ", op.text())?;
                right.fmt_prec(f, prec + 1)?;
                if needs_parens {
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
