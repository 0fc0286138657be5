//! Guard collection along a call path, with the normalization layer:
//! mapping accesses flatten to named map reads, type casts resolve to sort
//! coercions, undeclared external returns get conservative fresh symbols,
//! and loops over array lengths contribute bound predicates instead of
//! being unrolled.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::reachability::{BinOp as RBinOp, Expr as RExpr, Sort, SymbolOwner, SymbolTable};

use super::ast::{
    AssignOp, ContractDef, Expr, FunctionDef, ProjectModel, SourceLoc, Statement, TypeTag,
};
use super::traverse::{CallPath, TargetCategory, TargetOp, TraverseConfig};
use super::FrontendError;

/// Where a guard came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GuardOrigin {
    Require,
    Assert,
    Branch,
}

/// One path predicate.
#[derive(Debug, Clone)]
pub struct Guard {
    pub condition: RExpr,
    pub origin: GuardOrigin,
    pub loc: SourceLoc,
    /// True when the condition involves conservative defaults (external
    /// returns, unresolved calls).
    pub conservative: bool,
}

/// Binding for one entry parameter: a symbol name, or a concrete value that
/// the reachability stage turns into an equality side constraint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaValue {
    Symbol { symbol: String },
    Concrete { value: serde_json::Value },
}

pub type SigmaBindings = BTreeMap<String, SigmaValue>;

/// Guards along `path`, normalized into the constraint IR, with the symbol
/// table the reachability stage needs. The walk replays the path's pinned
/// route, so the same `(model, path, sigma)` always yields the same guards.
pub fn collect_predicates(
    model: &ProjectModel,
    path: &CallPath,
    sigma: &SigmaBindings,
) -> Result<(Vec<Guard>, SymbolTable), FrontendError> {
    let contract = model
        .contract(&path.contract)
        .ok_or_else(|| FrontendError::MissingContract(path.contract.clone()))?;
    let (_, entry) = model.resolve_function(contract, &path.entry).ok_or_else(|| {
        FrontendError::MissingFunction(path.contract.clone(), path.entry.clone())
    })?;
    // replaying the pinned route with the same target reproduces the walk,
    // guards included, ending at the same sink
    let config = TraverseConfig::default();
    let walker = Walker::new(
        model,
        contract,
        &path.target,
        sigma,
        &config,
        path.route.clone(),
    );
    let outcome = walker.run(entry);
    if outcome.depth_exceeded {
        return Err(FrontendError::DepthExceeded);
    }
    Ok((outcome.guards, outcome.symbols))
}

/// Equality side constraints for concrete sigma values (arrays constrain
/// their length; strings stay unconstrained opaque symbols).
pub fn sigma_constraints(
    entry: &FunctionDef,
    sigma: &SigmaBindings,
    symbols: &SymbolTable,
) -> Vec<RExpr> {
    let mut out = Vec::new();
    for param in &entry.params {
        let Some(SigmaValue::Concrete { value }) = sigma.get(&param.name) else {
            continue;
        };
        let sym = symbol_for_param(&param.name, sigma);
        match (&param.ty, value) {
            (TypeTag::Array(_), serde_json::Value::Array(items)) => {
                let name = format!("len({sym})");
                if symbols.get(&name).is_some() {
                    out.push(RExpr::eq(
                        RExpr::Sym(name),
                        RExpr::Int(BigUint::from(items.len())),
                    ));
                }
            }
            (TypeTag::Bool, serde_json::Value::Bool(b)) => {
                if symbols.get(&sym).is_some() {
                    out.push(RExpr::eq(RExpr::Sym(sym), RExpr::Bool(*b)));
                }
            }
            (TypeTag::Str, _) => {}
            (_, v) => {
                if let Some(int) = json_to_biguint(v) {
                    if symbols.get(&sym).is_some() {
                        out.push(RExpr::eq(RExpr::Sym(sym), RExpr::Int(int)));
                    }
                }
            }
        }
    }
    out
}

pub(crate) fn json_to_biguint(v: &serde_json::Value) -> Option<BigUint> {
    match v {
        serde_json::Value::Number(n) => n.as_u64().map(BigUint::from),
        serde_json::Value::String(s) => {
            if let Some(hex) = s.strip_prefix("0x") {
                BigUint::parse_bytes(hex.as_bytes(), 16)
            } else {
                BigUint::parse_bytes(s.as_bytes(), 10)
            }
        }
        _ => None,
    }
}

/// Symbol name a parameter binds to: the sigma-declared symbol, else the
/// parameter name without its leading underscores.
pub(crate) fn symbol_for_param(param: &str, sigma: &SigmaBindings) -> String {
    match sigma.get(param) {
        Some(SigmaValue::Symbol { symbol }) => symbol.clone(),
        _ => param.trim_start_matches('_').to_string(),
    }
}

fn sort_of(ty: &TypeTag) -> Sort {
    match ty {
        TypeTag::Bool => Sort::Bool,
        TypeTag::Address | TypeTag::Named(_) => Sort::Addr,
        _ => Sort::Int,
    }
}

/// A resolved runtime value.
#[derive(Debug, Clone)]
enum Rval {
    /// Scalar symbolic expression.
    Scalar(RExpr),
    /// Array value: only the length is tracked.
    Array { len: RExpr },
    /// A mapping (or partial nested-mapping access) rooted at a state var.
    MapRef { map: String, keys: Vec<RExpr>, value_ty: TypeTag },
    /// A contract/interface handle (external call receiver); carries the
    /// handle's name for diagnostics.
    Handle(#[allow(dead_code)] String),
}

type Env = BTreeMap<String, Rval>;

pub(crate) struct SinkInfo {
    pub description: String,
    pub loc: SourceLoc,
}

pub(crate) struct WalkOutcome {
    pub hops: Vec<String>,
    pub decisions: Vec<(usize, usize)>,
    pub guards: Vec<Guard>,
    pub symbols: SymbolTable,
    pub sink: Option<SinkInfo>,
    pub depth_exceeded: bool,
}

enum Flow {
    Normal,
    Return,
    Revert,
    Found,
    Abort,
}

/// Depth-first statement walker shared by traversal and predicate
/// collection. One instance runs one route attempt.
pub(crate) struct Walker<'m> {
    model: &'m ProjectModel,
    contract: &'m ContractDef,
    target: &'m TargetOp,
    sigma: &'m SigmaBindings,
    config: &'m TraverseConfig,
    prefix: Vec<usize>,

    envs: Vec<Env>,
    hops: Vec<String>,
    decisions: Vec<(usize, usize)>,
    guards: Vec<Guard>,
    symbols: SymbolTable,
    sink: Option<SinkInfo>,
    depth_exceeded: bool,
    conservative_touch: bool,
}

#[derive(Clone, Copy)]
struct PhRef<'m> {
    fun: &'m FunctionDef,
    next_idx: usize,
    fn_env: usize,
}

impl<'m> Walker<'m> {
    pub(crate) fn new(
        model: &'m ProjectModel,
        contract: &'m ContractDef,
        target: &'m TargetOp,
        sigma: &'m SigmaBindings,
        config: &'m TraverseConfig,
        prefix: Vec<usize>,
    ) -> Self {
        Walker {
            model,
            contract,
            target,
            sigma,
            config,
            prefix,
            envs: Vec::new(),
            hops: Vec::new(),
            decisions: Vec::new(),
            guards: Vec::new(),
            symbols: SymbolTable::new(),
            sink: None,
            depth_exceeded: false,
            conservative_touch: false,
        }
    }

    pub(crate) fn run(mut self, entry: &'m FunctionDef) -> WalkOutcome {
        let env = self.bind_entry_params(entry);
        self.envs.push(env);
        let _ = self.walk_function(entry, 0, 0);
        WalkOutcome {
            hops: self.hops,
            decisions: self.decisions,
            guards: self.guards,
            symbols: self.symbols,
            sink: self.sink,
            depth_exceeded: self.depth_exceeded,
        }
    }

    fn bind_entry_params(&mut self, entry: &'m FunctionDef) -> Env {
        let mut env = Env::new();
        for param in &entry.params {
            let sym = symbol_for_param(&param.name, self.sigma);
            let rv = match &param.ty {
                TypeTag::Array(_) => {
                    let len_name = format!("len({sym})");
                    self.symbols
                        .declare(&len_name, Sort::Len, SymbolOwner::Attacker);
                    Rval::Array {
                        len: RExpr::Sym(len_name),
                    }
                }
                TypeTag::Named(name) => {
                    self.symbols.declare(&sym, Sort::Addr, SymbolOwner::Attacker);
                    let _ = name;
                    Rval::Scalar(RExpr::Sym(sym))
                }
                ty => {
                    self.symbols
                        .declare(&sym, sort_of(ty), SymbolOwner::Attacker);
                    Rval::Scalar(RExpr::Sym(sym))
                }
            };
            env.insert(param.name.clone(), rv);
        }
        env
    }

    fn decide(&mut self, options: usize) -> usize {
        let pos = self.decisions.len();
        let choice = if pos < self.prefix.len() {
            self.prefix[pos].min(options - 1)
        } else {
            0
        };
        self.decisions.push((choice, options));
        choice
    }

    fn fresh_opaque(&mut self, name: String, sort: Sort) -> RExpr {
        self.symbols
            .declare(&name, sort, SymbolOwner::ExternalDefault);
        self.conservative_touch = true;
        RExpr::Sym(name)
    }

    fn walk_function(&mut self, fun: &'m FunctionDef, env_idx: usize, depth: usize) -> Flow {
        if depth > self.config.depth_limit {
            self.depth_exceeded = true;
            return Flow::Abort;
        }
        self.hops.push(fun.name.clone());
        self.walk_chain(fun, 0, env_idx, depth)
    }

    fn walk_chain(
        &mut self,
        fun: &'m FunctionDef,
        chain_idx: usize,
        fn_env: usize,
        depth: usize,
    ) -> Flow {
        if chain_idx < fun.modifiers.len() {
            let inv = &fun.modifiers[chain_idx];
            match self.model.resolve_modifier(self.contract, &inv.name) {
                Some((_, mdef)) => {
                    self.hops.push(mdef.name.clone());
                    let mut menv = Env::new();
                    for (param, arg) in mdef.params.iter().zip(inv.args.iter()) {
                        let rv = self.resolve_expr(arg, fn_env, depth);
                        menv.insert(param.name.clone(), rv);
                    }
                    let menv_idx = self.envs.len();
                    self.envs.push(menv);
                    let ph = PhRef {
                        fun,
                        next_idx: chain_idx + 1,
                        fn_env,
                    };
                    // the body slice lives as long as the model
                    let body: &'m [Statement] = &mdef.body;
                    self.walk_stmts(body, menv_idx, Some(ph), depth)
                }
                // unresolved modifier: treated as transparent
                None => self.walk_chain(fun, chain_idx + 1, fn_env, depth),
            }
        } else {
            match &fun.body {
                Some(body) => self.walk_stmts(body, fn_env, None, depth),
                None => Flow::Normal,
            }
        }
    }

    fn walk_stmts(
        &mut self,
        stmts: &'m [Statement],
        env_idx: usize,
        ph: Option<PhRef<'m>>,
        depth: usize,
    ) -> Flow {
        for stmt in stmts {
            match self.walk_stmt(stmt, env_idx, ph, depth) {
                Flow::Normal => continue,
                other => return other,
            }
        }
        Flow::Normal
    }

    fn walk_stmt(
        &mut self,
        stmt: &'m Statement,
        env_idx: usize,
        ph: Option<PhRef<'m>>,
        depth: usize,
    ) -> Flow {
        match stmt {
            Statement::VarDecl { name, init, ty, .. } => {
                let rv = match init {
                    Some(expr) => self.resolve_expr(expr, env_idx, depth),
                    None => self.undefined_local(name, ty),
                };
                self.envs[env_idx].insert(name.clone(), rv);
                Flow::Normal
            }
            Statement::Assign {
                target, op, value, ..
            } => {
                if let Some(info) = self.match_assign_target(stmt, target) {
                    self.sink = Some(info);
                    return Flow::Found;
                }
                // local updates stay visible; state writes keep pre-state
                // symbols (single-transaction semantics)
                let value_rv = self.resolve_expr(value, env_idx, depth);
                if let Expr::Ident(name) = target {
                    if self.envs[env_idx].contains_key(name) {
                        let updated = match (op, self.envs[env_idx].get(name), &value_rv) {
                            (AssignOp::Assign, _, _) => value_rv,
                            (op, Some(Rval::Scalar(old)), Rval::Scalar(new)) => {
                                let rop = if *op == AssignOp::AddAssign {
                                    RBinOp::Add
                                } else {
                                    RBinOp::Sub
                                };
                                Rval::Scalar(fold_binary(rop, old.clone(), new.clone()))
                            }
                            _ => value_rv,
                        };
                        self.envs[env_idx].insert(name.clone(), updated);
                    }
                }
                Flow::Normal
            }
            Statement::Require { condition, loc, .. } => {
                self.emit_guard(condition, GuardOrigin::Require, *loc, env_idx, depth);
                Flow::Normal
            }
            Statement::Assert { condition, loc } => {
                self.emit_guard(condition, GuardOrigin::Assert, *loc, env_idx, depth);
                Flow::Normal
            }
            Statement::If {
                condition,
                then_branch,
                else_branch,
                loc,
            } => {
                let choice = self.decide(2);
                self.conservative_touch = false;
                let cond = self.resolve_bool(condition, env_idx, depth);
                let cond = if choice == 0 { cond } else { negate(cond) };
                self.push_guard(cond, GuardOrigin::Branch, *loc);
                let branch: &'m [Statement] = if choice == 0 { then_branch } else { else_branch };
                match self.walk_stmts(branch, env_idx, ph, depth) {
                    Flow::Normal => Flow::Normal,
                    other => other,
                }
            }
            Statement::For {
                init,
                condition,
                body,
                loc,
                ..
            } => {
                // bind the loop variable before deciding the route so both
                // routes resolve the bound consistently
                if let Some(init_stmt) = init {
                    let _ = self.walk_stmt(init_stmt, env_idx, None, depth);
                }
                let choice = self.decide(2);
                if choice == 0 {
                    // 0-iteration route: loops always terminate, so the
                    // continuation is reachable without a predicate
                    Flow::Normal
                } else {
                    // single symbolic iteration, guarded by the loop bound
                    if let Some(cond) = condition {
                        self.conservative_touch = false;
                        let bound = self.resolve_bool(cond, env_idx, depth);
                        self.push_guard(bound, GuardOrigin::Branch, *loc);
                    }
                    match self.walk_stmts(body, env_idx, ph, depth) {
                        Flow::Normal | Flow::Return | Flow::Revert => Flow::Normal,
                        other => other,
                    }
                }
            }
            Statement::While {
                condition,
                body,
                loc,
            } => {
                let choice = self.decide(2);
                if choice == 0 {
                    Flow::Normal
                } else {
                    self.conservative_touch = false;
                    let bound = self.resolve_bool(condition, env_idx, depth);
                    self.push_guard(bound, GuardOrigin::Branch, *loc);
                    match self.walk_stmts(body, env_idx, ph, depth) {
                        Flow::Normal | Flow::Return | Flow::Revert => Flow::Normal,
                        other => other,
                    }
                }
            }
            Statement::Return { value, .. } => {
                // resolve for hop bookkeeping; the value itself is unused at
                // statement level
                if let Some(e) = value {
                    let _ = self.resolve_expr(e, env_idx, depth);
                }
                Flow::Return
            }
            Statement::Revert { .. } => Flow::Revert,
            Statement::Expr { expr, loc } => {
                if let Some(info) = self.match_call_target(expr, env_idx, *loc, depth) {
                    self.sink = Some(info);
                    return Flow::Found;
                }
                // statement-position internal calls are walked in full
                if let Expr::Call { callee, args } = expr {
                    if let Expr::Ident(name) = callee.as_ref() {
                        if let Some((_, fun)) = self.model.resolve_function(self.contract, name) {
                            let resolved: Vec<Rval> = args
                                .iter()
                                .map(|a| self.resolve_expr(a, env_idx, depth))
                                .collect();
                            let mut callee_env = Env::new();
                            for (p, rv) in fun.params.iter().zip(resolved) {
                                callee_env.insert(p.name.clone(), rv);
                            }
                            let callee_idx = self.envs.len();
                            self.envs.push(callee_env);
                            return match self.walk_function(fun, callee_idx, depth + 1) {
                                Flow::Return | Flow::Normal => Flow::Normal,
                                other => other,
                            };
                        }
                    }
                }
                // other expression statements only matter for resolution
                let _ = self.resolve_expr(expr, env_idx, depth);
                Flow::Normal
            }
            Statement::Placeholder { .. } => match ph {
                Some(ctx) => {
                    match self.walk_chain(ctx.fun, ctx.next_idx, ctx.fn_env, depth) {
                        Flow::Normal | Flow::Return => Flow::Normal,
                        other => other,
                    }
                }
                None => Flow::Normal,
            },
            Statement::Scope { body, .. } => self.walk_stmts(body, env_idx, ph, depth),
            Statement::Opaque { .. } => Flow::Normal,
        }
    }

    // -- target matching --

    fn match_assign_target(&mut self, stmt: &Statement, target: &Expr) -> Option<SinkInfo> {
        let base = root_ident(target)?;
        self.model.resolve_state_var(self.contract, base)?;
        let category_ok = self.target.category == TargetCategory::StateModification;
        let sink_ok = match &self.target.sink {
            Some(s) => s == base,
            None => true,
        };
        if category_ok && sink_ok {
            return Some(SinkInfo {
                description: render_stmt(stmt),
                loc: stmt.loc(),
            });
        }
        None
    }

    fn match_call_target(
        &mut self,
        expr: &Expr,
        env_idx: usize,
        loc: SourceLoc,
        depth: usize,
    ) -> Option<SinkInfo> {
        let Expr::Call { callee, .. } = expr else {
            return None;
        };
        let (category, sink_name, is_internal) = match callee.as_ref() {
            Expr::Ident(name) => {
                let lowered = name.to_ascii_lowercase();
                if self.model.resolve_function(self.contract, name).is_some()
                    && (lowered.contains("mint") || lowered.contains("burn"))
                {
                    (TargetCategory::StateModification, name.clone(), true)
                } else {
                    return None;
                }
            }
            Expr::Member { base, member } => {
                if let Expr::Ident(b) = base.as_ref() {
                    if b == "super" {
                        let lowered = member.to_ascii_lowercase();
                        if lowered.contains("mint") || lowered.contains("burn") {
                            (TargetCategory::StateModification, member.clone(), false)
                        } else {
                            return None;
                        }
                    } else if self.is_external_receiver(base, env_idx, depth) {
                        (external_category(member), member.clone(), false)
                    } else {
                        return None;
                    }
                } else if self.is_external_receiver(base, env_idx, depth) {
                    (external_category(member), member.clone(), false)
                } else {
                    return None;
                }
            }
            _ => return None,
        };

        let category_ok = category == self.target.category
            || (self.target.category == TargetCategory::ExternalCall
                && category == TargetCategory::FundTransfer);
        let sink_ok = match &self.target.sink {
            Some(s) => *s == sink_name,
            None => true,
        };
        if category_ok && sink_ok {
            if is_internal {
                self.hops.push(sink_name);
            }
            return Some(SinkInfo {
                description: expr.to_string(),
                loc,
            });
        }
        None
    }

    fn is_external_receiver(&mut self, base: &Expr, env_idx: usize, depth: usize) -> bool {
        match base {
            Expr::Cast { ty, .. } => ty.is_address_like(),
            Expr::Ident(name) => {
                match self.envs[env_idx].get(name).cloned() {
                    Some(Rval::Handle(_)) => true,
                    Some(Rval::Scalar(RExpr::Sym(sym))) => self
                        .symbols
                        .get(&sym)
                        .map(|i| i.sort == Sort::Addr)
                        .unwrap_or(false),
                    Some(_) => false,
                    None => {
                        // state var of contract/interface/address type
                        self.model
                            .resolve_state_var(self.contract, name)
                            .map(|v| v.ty.is_address_like())
                            .unwrap_or(false)
                    }
                }
            }
            _ => {
                let _ = depth;
                false
            }
        }
    }

    // -- guards --

    fn emit_guard(
        &mut self,
        condition: &Expr,
        origin: GuardOrigin,
        loc: SourceLoc,
        env_idx: usize,
        depth: usize,
    ) {
        self.conservative_touch = false;
        let resolved = self.resolve_bool(condition, env_idx, depth);
        self.push_guard(resolved, origin, loc);
    }

    fn push_guard(&mut self, condition: RExpr, origin: GuardOrigin, loc: SourceLoc) {
        let conservative = self.conservative_touch;
        for conjunct in condition.split_conjuncts() {
            if conjunct.is_const_true() {
                continue;
            }
            self.guards.push(Guard {
                condition: conjunct,
                origin,
                loc,
                conservative,
            });
        }
    }

    // -- expression resolution --

    fn resolve_bool(&mut self, expr: &Expr, env_idx: usize, depth: usize) -> RExpr {
        match self.resolve_expr(expr, env_idx, depth) {
            Rval::Scalar(e) => e,
            _ => self.fresh_opaque(expr.to_string(), Sort::Bool),
        }
    }

    fn undefined_local(&mut self, name: &str, ty: &TypeTag) -> Rval {
        match ty {
            TypeTag::Array(_) => Rval::Array {
                len: self.fresh_opaque(format!("len({name})"), Sort::Len),
            },
            _ => Rval::Scalar(self.fresh_opaque(name.to_string(), sort_of(ty))),
        }
    }

    fn resolve_expr(&mut self, expr: &Expr, env_idx: usize, depth: usize) -> Rval {
        match expr {
            Expr::Number(n) => Rval::Scalar(RExpr::Int(parse_number(n))),
            Expr::Bool(b) => Rval::Scalar(RExpr::Bool(*b)),
            // string literals become opaque symbols keyed by their text, so
            // equal literals stay syntactically consistent
            Expr::Str(s) => {
                let name = format!("\"{s}\"");
                self.symbols
                    .declare(&name, Sort::Int, SymbolOwner::Attacker);
                Rval::Scalar(RExpr::Sym(name))
            }
            Expr::Ident(name) => self.resolve_ident(name, env_idx),
            Expr::Member { base, member } => self.resolve_member(expr, base, member, env_idx, depth),
            Expr::Index { .. } => self.resolve_index(expr, env_idx, depth),
            Expr::Call { .. } => self.resolve_call(expr, env_idx, depth),
            Expr::Cast { ty, expr: inner } => {
                let rv = self.resolve_expr(inner, env_idx, depth);
                match (ty, rv) {
                    // sort coercion only; the value carries over
                    (t, Rval::Scalar(e)) if t.is_address_like() => match e {
                        RExpr::Sym(name) => Rval::Handle(name),
                        other => Rval::Scalar(other),
                    },
                    (_, rv) => rv,
                }
            }
            Expr::New { ty, args } => match ty {
                TypeTag::Array(_) => {
                    let len = match args.first() {
                        Some(a) => match self.resolve_expr(a, env_idx, depth) {
                            Rval::Scalar(e) => e,
                            _ => self.fresh_opaque(expr.to_string(), Sort::Len),
                        },
                        None => RExpr::Int(BigUint::zero()),
                    };
                    Rval::Array { len }
                }
                _ => Rval::Scalar(self.fresh_opaque(expr.to_string(), Sort::Addr)),
            },
            Expr::Unary { op, operand } => {
                let rv = self.resolve_expr(operand, env_idx, depth);
                match (op, rv) {
                    (super::ast::UnOp::Not, Rval::Scalar(e)) => Rval::Scalar(negate(e)),
                    (super::ast::UnOp::Neg, Rval::Scalar(e)) => Rval::Scalar(fold_binary(
                        RBinOp::Sub,
                        RExpr::Int(BigUint::zero()),
                        e,
                    )),
                    (_, _) => Rval::Scalar(self.fresh_opaque(expr.to_string(), Sort::Int)),
                }
            }
            Expr::Binary { op, left, right } => {
                use super::ast::BinOp as B;
                let l = self.resolve_expr(left, env_idx, depth);
                let r = self.resolve_expr(right, env_idx, depth);
                let (Rval::Scalar(le), Rval::Scalar(re)) = (&l, &r) else {
                    // array/handle comparisons fall back to opaque symbols
                    return Rval::Scalar(self.fresh_opaque(expr.to_string(), Sort::Bool));
                };
                let (le, re) = (le.clone(), re.clone());
                let rop = match op {
                    B::Or => RBinOp::Or,
                    B::And => RBinOp::And,
                    B::Eq => RBinOp::Eq,
                    B::Ne => RBinOp::Ne,
                    B::Lt => RBinOp::Lt,
                    B::Le => RBinOp::Le,
                    B::Gt => RBinOp::Gt,
                    B::Ge => RBinOp::Ge,
                    B::Add => RBinOp::Add,
                    B::Sub => RBinOp::Sub,
                    B::Mul => RBinOp::Mul,
                    B::Div => RBinOp::Div,
                    B::Mod => {
                        return Rval::Scalar(match (&le, &re) {
                            (RExpr::Int(a), RExpr::Int(b)) if !b.is_zero() => {
                                RExpr::Int(a % b)
                            }
                            _ => self.fresh_opaque(expr.to_string(), Sort::Int),
                        });
                    }
                    B::Pow => {
                        return Rval::Scalar(match (&le, &re) {
                            (RExpr::Int(a), RExpr::Int(b)) => match b.to_u32() {
                                Some(exp) => RExpr::Int(a.pow(exp)),
                                None => self.fresh_opaque(expr.to_string(), Sort::Int),
                            },
                            _ => self.fresh_opaque(expr.to_string(), Sort::Int),
                        });
                    }
                };
                Rval::Scalar(fold_binary(rop, le, re))
            }
        }
    }

    fn resolve_ident(&mut self, name: &str, env_idx: usize) -> Rval {
        if let Some(rv) = self.envs[env_idx].get(name) {
            return rv.clone();
        }
        if let Some(var) = self.model.resolve_state_var(self.contract, name) {
            return match &var.ty {
                TypeTag::Mapping(_, v) => Rval::MapRef {
                    map: name.to_string(),
                    keys: Vec::new(),
                    value_ty: (**v).clone(),
                },
                TypeTag::Array(elem) => Rval::MapRef {
                    map: name.to_string(),
                    keys: Vec::new(),
                    value_ty: (**elem).clone(),
                },
                ty => {
                    let sort = sort_of(ty);
                    self.symbols
                        .declare(name, sort, SymbolOwner::ProtocolState);
                    if sort == Sort::Addr {
                        Rval::Handle(name.to_string())
                    } else {
                        Rval::Scalar(RExpr::Sym(name.to_string()))
                    }
                }
            };
        }
        if self.model.contract(name).is_some() {
            return Rval::Handle(name.to_string());
        }
        // unknown global identifier: conservative default
        Rval::Scalar(self.fresh_opaque(name.to_string(), Sort::Int))
    }

    fn resolve_member(
        &mut self,
        whole: &Expr,
        base: &Expr,
        member: &str,
        env_idx: usize,
        depth: usize,
    ) -> Rval {
        if let Expr::Ident(b) = base {
            match (b.as_str(), member) {
                ("msg", "sender") => {
                    self.symbols
                        .declare("msg.sender", Sort::Addr, SymbolOwner::Attacker);
                    return Rval::Scalar(RExpr::Sym("msg.sender".into()));
                }
                ("msg", "value") => {
                    self.symbols
                        .declare("msg.value", Sort::Int, SymbolOwner::Attacker);
                    return Rval::Scalar(RExpr::Sym("msg.value".into()));
                }
                ("block", _) | ("tx", _) => {
                    let name = whole.to_string();
                    self.symbols
                        .declare(&name, Sort::Int, SymbolOwner::ProtocolState);
                    return Rval::Scalar(RExpr::Sym(name));
                }
                _ => {}
            }
        }
        if member == "length" {
            let rv = self.resolve_expr(base, env_idx, depth);
            return match rv {
                Rval::Array { len } => Rval::Scalar(len),
                Rval::MapRef { map, keys, .. } if keys.is_empty() => {
                    let name = format!("len({map})");
                    self.symbols
                        .declare(&name, Sort::Len, SymbolOwner::ProtocolState);
                    Rval::Scalar(RExpr::Sym(name))
                }
                _ => Rval::Scalar(self.fresh_opaque(whole.to_string(), Sort::Len)),
            };
        }
        // struct fields and unknown members stay opaque protocol state
        let name = whole.to_string();
        self.symbols
            .declare(&name, Sort::Int, SymbolOwner::ProtocolState);
        Rval::Scalar(RExpr::Sym(name))
    }

    fn resolve_index(&mut self, whole: &Expr, env_idx: usize, depth: usize) -> Rval {
        let Expr::Index { base, index } = whole else {
            unreachable!()
        };
        let base_rv = self.resolve_expr(base, env_idx, depth);
        let key = match self.resolve_expr(index, env_idx, depth) {
            Rval::Scalar(e) => e,
            _ => self.fresh_opaque(index.to_string(), Sort::Int),
        };
        match base_rv {
            Rval::MapRef {
                map,
                mut keys,
                value_ty,
            } => {
                keys.push(key);
                match value_ty {
                    TypeTag::Mapping(_, v) => Rval::MapRef {
                        map,
                        keys,
                        value_ty: *v,
                    },
                    ty => Rval::Scalar(RExpr::MapRead {
                        map,
                        keys,
                        value_sort: sort_of(&ty),
                    }),
                }
            }
            // element of a local array: opaque, keyed by rendering
            _ => Rval::Scalar(self.fresh_opaque(whole.to_string(), Sort::Int)),
        }
    }

    fn resolve_call(&mut self, whole: &Expr, env_idx: usize, depth: usize) -> Rval {
        let Expr::Call { callee, args } = whole else {
            unreachable!()
        };
        match callee.as_ref() {
            Expr::Ident(name) => {
                if is_builtin_opaque(name) {
                    let sort = if name == "ecrecover" { Sort::Addr } else { Sort::Int };
                    return Rval::Scalar(self.fresh_opaque(whole.to_string(), sort));
                }
                if let Some((_, fun)) = self.model.resolve_function(self.contract, name) {
                    return self.inline_or_summarize(whole, fun, args, env_idx, depth);
                }
                Rval::Scalar(self.fresh_opaque(whole.to_string(), Sort::Int))
            }
            Expr::Member { base, member } => {
                if let Expr::Ident(b) = base.as_ref() {
                    if b == "super" {
                        if let Some((_, fun)) =
                            self.model.resolve_function(self.contract, member)
                        {
                            return self.inline_or_summarize(whole, fun, args, env_idx, depth);
                        }
                    }
                    if b == "abi" {
                        return Rval::Scalar(self.fresh_opaque(whole.to_string(), Sort::Int));
                    }
                }
                // external call: conservative default over a fresh symbol
                let sort = self.external_return_sort(base, member);
                Rval::Scalar(self.fresh_opaque(whole.to_string(), sort))
            }
            _ => Rval::Scalar(self.fresh_opaque(whole.to_string(), Sort::Int)),
        }
    }

    /// Return sort of an external call, from the interface declaration when
    /// the receiver type is in the model.
    fn external_return_sort(&self, base: &Expr, member: &str) -> Sort {
        if let Expr::Cast {
            ty: TypeTag::Named(iface),
            ..
        } = base
        {
            if let Some(c) = self.model.contract(iface) {
                if let Some(f) = c.function(member) {
                    if let Some(ret) = f.returns.first() {
                        return sort_of(&ret.ty);
                    }
                }
            }
        }
        Sort::Int
    }

    /// Inline a simple expression function, or summarize a complex one by
    /// its optimistic spine; unresolvable bodies yield a conservative fresh
    /// symbol of the declared return sort.
    fn inline_or_summarize(
        &mut self,
        whole: &Expr,
        fun: &'m FunctionDef,
        args: &[Expr],
        env_idx: usize,
        depth: usize,
    ) -> Rval {
        if depth + 1 > self.config.depth_limit {
            self.depth_exceeded = true;
            let sort = fun.returns.first().map(|r| sort_of(&r.ty)).unwrap_or(Sort::Int);
            return Rval::Scalar(self.fresh_opaque(whole.to_string(), sort));
        }
        self.hops.push(fun.name.clone());
        let resolved: Vec<Rval> = args
            .iter()
            .map(|a| self.resolve_expr(a, env_idx, depth))
            .collect();
        let mut env = Env::new();
        for (p, rv) in fun.params.iter().zip(resolved) {
            env.insert(p.name.clone(), rv);
        }
        let callee_idx = self.envs.len();
        self.envs.push(env);

        let Some(body) = &fun.body else {
            let sort = fun.returns.first().map(|r| sort_of(&r.ty)).unwrap_or(Sort::Int);
            return Rval::Scalar(self.fresh_opaque(whole.to_string(), sort));
        };

        // optimistic spine: declarations and local assignments are tracked,
        // loops and branches are skipped, the first top-level return wins
        for stmt in body.iter() {
            match stmt {
                Statement::VarDecl { name, init, ty, .. } => {
                    let rv = match init {
                        Some(e) => self.resolve_expr(e, callee_idx, depth + 1),
                        None => self.undefined_local(name, ty),
                    };
                    self.envs[callee_idx].insert(name.clone(), rv);
                }
                Statement::Assign {
                    target: Expr::Ident(name),
                    op: AssignOp::Assign,
                    value,
                    ..
                } if self.envs[callee_idx].contains_key(name) => {
                    let rv = self.resolve_expr(value, callee_idx, depth + 1);
                    self.envs[callee_idx].insert(name.clone(), rv);
                }
                Statement::Return { value, .. } => {
                    return match value {
                        Some(e) => self.resolve_expr(e, callee_idx, depth + 1),
                        None => Rval::Scalar(RExpr::Bool(true)),
                    };
                }
                // skipped regions: side effects ignored on the spine
                _ => {}
            }
        }
        let sort = fun.returns.first().map(|r| sort_of(&r.ty)).unwrap_or(Sort::Int);
        Rval::Scalar(self.fresh_opaque(whole.to_string(), sort))
    }
}

fn external_category(method: &str) -> TargetCategory {
    match method {
        "transfer" | "transferFrom" | "send" | "safeTransfer" | "safeTransferFrom" => {
            TargetCategory::FundTransfer
        }
        _ => TargetCategory::ExternalCall,
    }
}

fn is_builtin_opaque(name: &str) -> bool {
    matches!(
        name,
        "keccak256"
            | "sha256"
            | "ripemd160"
            | "ecrecover"
            | "addmod"
            | "mulmod"
            | "blockhash"
            | "gasleft"
            | "selfbalance"
    )
}

fn root_ident(expr: &Expr) -> Option<&str> {
    match expr {
        Expr::Ident(name) => Some(name),
        Expr::Index { base, .. } => root_ident(base),
        Expr::Member { base, .. } => root_ident(base),
        _ => None,
    }
}

fn render_stmt(stmt: &Statement) -> String {
    match stmt {
        Statement::Assign {
            target, op, value, ..
        } => format!("{target} {op} {value}"),
        Statement::Expr { expr, .. } => expr.to_string(),
        other => format!("{other:?}"),
    }
}

fn parse_number(text: &str) -> BigUint {
    if let Some(hex) = text.strip_prefix("0x") {
        BigUint::parse_bytes(hex.as_bytes(), 16).unwrap_or_default()
    } else {
        BigUint::parse_bytes(text.as_bytes(), 10).unwrap_or_default()
    }
}

fn negate(e: RExpr) -> RExpr {
    use crate::reachability::UnOp;
    match e {
        RExpr::Bool(b) => RExpr::Bool(!b),
        RExpr::Unary {
            op: UnOp::Not,
            operand,
        } => *operand,
        other => RExpr::not(other),
    }
}

/// Constant folding over the IR.
fn fold_binary(op: RBinOp, left: RExpr, right: RExpr) -> RExpr {
    use RExpr::{Bool, Int};
    match (&left, &right) {
        (Int(a), Int(b)) => {
            let val = match op {
                RBinOp::Add => return Int(a + b),
                RBinOp::Sub => {
                    return if a >= b {
                        Int(a - b)
                    } else {
                        // negative constants cannot arise from non-negative
                        // source arithmetic that executes; keep symbolic
                        RExpr::bin(op, left.clone(), right.clone())
                    };
                }
                RBinOp::Mul => return Int(a * b),
                RBinOp::Div => {
                    return if b.is_zero() {
                        RExpr::bin(op, left.clone(), right.clone())
                    } else {
                        Int(a / b)
                    };
                }
                RBinOp::Eq => a == b,
                RBinOp::Ne => a != b,
                RBinOp::Lt => a < b,
                RBinOp::Le => a <= b,
                RBinOp::Gt => a > b,
                RBinOp::Ge => a >= b,
                RBinOp::And | RBinOp::Or => return RExpr::bin(op, left.clone(), right.clone()),
            };
            Bool(val)
        }
        (Bool(a), Bool(b)) => match op {
            RBinOp::And => Bool(*a && *b),
            RBinOp::Or => Bool(*a || *b),
            RBinOp::Eq => Bool(a == b),
            RBinOp::Ne => Bool(a != b),
            _ => RExpr::bin(op, left.clone(), right.clone()),
        },
        (Bool(true), other) if op == RBinOp::And => other.clone(),
        (other, Bool(true)) if op == RBinOp::And => other.clone(),
        (Bool(false), other) if op == RBinOp::Or => other.clone(),
        (other, Bool(false)) if op == RBinOp::Or => other.clone(),
        _ => RExpr::bin(op, left, right),
    }
}
