//! Built-in decision procedure for the required fragment.
//!
//! Pipeline: map reads lower to fresh symbols keyed by their canonical
//! rendering; predicates flatten to a boolean skeleton over atoms; atom
//! assignments are enumerated with pruning; each candidate assignment's
//! numeric literals are checked by Fourier–Motzkin elimination (rational
//! soundness) plus a propagation-guided ascending search for an integer
//! witness. `Unsat` is only ever reported from a decisive argument — rational
//! infeasibility or an exhausted finite search — and every `Sat` model is
//! re-verified by direct evaluation before it is returned.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::expr::{eval_truth, BinOp, Expr, Sort, SymbolTable, UnOp, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum SatResult {
    Sat(BTreeMap<String, Value>),
    Unsat,
    Unknown(String),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat)
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("ill-sorted constraint: {0}")]
    IllSorted(String),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Global inclusive upper bound for numeric symbols (bounded-domain
    /// solving); `None` leaves symbols unbounded above.
    pub domain_max: Option<BigUint>,
    /// Node budget for the integer search before answering `Unknown`.
    pub search_node_cap: u64,
    /// Bounded enumeration for nonlinear atoms runs only when at most this
    /// many symbols are involved…
    pub nonlinear_max_symbols: usize,
    /// …and the enumerated space stays within this many combinations.
    pub nonlinear_max_space: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            domain_max: None,
            search_node_cap: 200_000,
            nonlinear_max_symbols: 2,
            nonlinear_max_space: 1 << 16,
        }
    }
}

/// Decide the conjunction of `predicates` over `symbols`.
pub fn check_sat(
    predicates: &[Expr],
    symbols: &SymbolTable,
    config: &SolverConfig,
) -> Result<SatResult, SolverError> {
    if predicates.is_empty() {
        return Ok(SatResult::Sat(BTreeMap::new()));
    }

    let mut ctx = Lowering::new(symbols);
    let mut skeletons = Vec::new();
    for p in predicates {
        skeletons.push(ctx.flatten(p)?);
    }

    let mut assignment: Vec<Option<bool>> = vec![None; ctx.atoms.len()];
    let mut best_unknown: Option<String> = None;
    let result = enumerate_atoms(
        &skeletons,
        &ctx,
        symbols,
        config,
        &mut assignment,
        0,
        &mut best_unknown,
    );
    let result = match result {
        Some(model) => SatResult::Sat(model),
        None => match best_unknown {
            Some(reason) => SatResult::Unknown(reason),
            None => SatResult::Unsat,
        },
    };

    if let SatResult::Sat(model) = &result {
        // self-check: a returned model must satisfy every predicate
        for p in predicates {
            if eval_truth(p, model) != Some(true) {
                return Ok(SatResult::Unknown(format!(
                    "model verification failed on `{p}`"
                )));
            }
        }
    }
    Ok(result)
}

// -- boolean layer --

#[derive(Debug, Clone)]
enum Skel {
    Const(bool),
    Atom(usize),
    Not(Box<Skel>),
    And(Box<Skel>, Box<Skel>),
    Or(Box<Skel>, Box<Skel>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    /// Boolean symbol (includes lowered boolean map reads).
    Bool(String),
    /// Numeric comparison, linearized lazily at the theory stage.
    Cmp { op: BinOp, left: Expr, right: Expr },
}

struct Lowering<'s> {
    symbols: &'s SymbolTable,
    atoms: Vec<Atom>,
    atom_index: BTreeMap<Atom, usize>,
    /// map-read rendering -> value sort
    lowered_maps: BTreeMap<String, Sort>,
}

impl<'s> Lowering<'s> {
    fn new(symbols: &'s SymbolTable) -> Self {
        Lowering {
            symbols,
            atoms: Vec::new(),
            atom_index: BTreeMap::new(),
            lowered_maps: BTreeMap::new(),
        }
    }

    fn sort_of(&self, e: &Expr) -> Result<Sort, SolverError> {
        match e {
            Expr::Int(_) => Ok(Sort::Int),
            Expr::Bool(_) => Ok(Sort::Bool),
            Expr::Sym(name) => self
                .symbols
                .get(name)
                .map(|i| i.sort)
                .ok_or_else(|| SolverError::IllSorted(format!("undeclared symbol `{name}`"))),
            Expr::MapRead { value_sort, .. } => Ok(*value_sort),
            Expr::Unary { op: UnOp::Not, .. } => Ok(Sort::Bool),
            Expr::Binary { op, .. } => {
                if op.is_comparison() || matches!(op, BinOp::And | BinOp::Or) {
                    Ok(Sort::Bool)
                } else {
                    Ok(Sort::Int)
                }
            }
        }
    }

    fn atom_id(&mut self, atom: Atom) -> usize {
        if let Some(idx) = self.atom_index.get(&atom) {
            return *idx;
        }
        let idx = self.atoms.len();
        self.atoms.push(atom.clone());
        self.atom_index.insert(atom, idx);
        idx
    }

    /// Lower map reads to symbols named by their rendering; syntactically
    /// equal reads collapse to the same symbol, distinct keys stay
    /// unconstrained relative to each other.
    fn lower(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::MapRead { value_sort, .. } => {
                let name = e.render();
                self.lowered_maps.insert(name.clone(), *value_sort);
                Expr::Sym(name)
            }
            Expr::Unary { op, operand } => Expr::Unary {
                op: *op,
                operand: Box::new(self.lower(operand)),
            },
            Expr::Binary { op, left, right } => Expr::Binary {
                op: *op,
                left: Box::new(self.lower(left)),
                right: Box::new(self.lower(right)),
            },
            other => other.clone(),
        }
    }

    fn flatten(&mut self, e: &Expr) -> Result<Skel, SolverError> {
        match e {
            Expr::Bool(b) => Ok(Skel::Const(*b)),
            Expr::Sym(name) => match self.sort_of(e)? {
                Sort::Bool => {
                    let id = self.atom_id(Atom::Bool(name.clone()));
                    Ok(Skel::Atom(id))
                }
                other => Err(SolverError::IllSorted(format!(
                    "{other:?}-sorted symbol `{name}` used as a predicate"
                ))),
            },
            Expr::MapRead { value_sort, .. } => {
                if *value_sort != Sort::Bool {
                    return Err(SolverError::IllSorted(format!(
                        "numeric map read `{e}` used as a predicate"
                    )));
                }
                let lowered = self.lower(e);
                let Expr::Sym(name) = lowered else { unreachable!() };
                let id = self.atom_id(Atom::Bool(name));
                Ok(Skel::Atom(id))
            }
            Expr::Unary {
                op: UnOp::Not,
                operand,
            } => Ok(Skel::Not(Box::new(self.flatten(operand)?))),
            Expr::Binary { op, left, right } => match op {
                BinOp::And => Ok(Skel::And(
                    Box::new(self.flatten(left)?),
                    Box::new(self.flatten(right)?),
                )),
                BinOp::Or => Ok(Skel::Or(
                    Box::new(self.flatten(left)?),
                    Box::new(self.flatten(right)?),
                )),
                BinOp::Eq | BinOp::Ne
                    if self.sort_of(left)? == Sort::Bool
                        || self.sort_of(right)? == Sort::Bool =>
                {
                    // boolean (in)equality becomes iff structure
                    let l = self.flatten(left)?;
                    let r = self.flatten(right)?;
                    let iff = Skel::Or(
                        Box::new(Skel::And(Box::new(l.clone()), Box::new(r.clone()))),
                        Box::new(Skel::And(
                            Box::new(Skel::Not(Box::new(l))),
                            Box::new(Skel::Not(Box::new(r))),
                        )),
                    );
                    Ok(if *op == BinOp::Eq {
                        iff
                    } else {
                        Skel::Not(Box::new(iff))
                    })
                }
                op if op.is_comparison() => {
                    let l = self.lower(left);
                    let r = self.lower(right);
                    let id = self.atom_id(Atom::Cmp {
                        op: *op,
                        left: l,
                        right: r,
                    });
                    Ok(Skel::Atom(id))
                }
                other => Err(SolverError::IllSorted(format!(
                    "arithmetic operator {other:?} used as a predicate in `{e}`"
                ))),
            },
            Expr::Int(_) => Err(SolverError::IllSorted(format!(
                "integer `{e}` used as a predicate"
            ))),
        }
    }
}

fn eval_skel(s: &Skel, assignment: &[Option<bool>]) -> Option<bool> {
    match s {
        Skel::Const(b) => Some(*b),
        Skel::Atom(i) => assignment[*i],
        Skel::Not(inner) => eval_skel(inner, assignment).map(|b| !b),
        Skel::And(a, b) => match (eval_skel(a, assignment), eval_skel(b, assignment)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Skel::Or(a, b) => match (eval_skel(a, assignment), eval_skel(b, assignment)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_atoms(
    skeletons: &[Skel],
    ctx: &Lowering,
    symbols: &SymbolTable,
    config: &SolverConfig,
    assignment: &mut Vec<Option<bool>>,
    next: usize,
    best_unknown: &mut Option<String>,
) -> Option<BTreeMap<String, Value>> {
    // prune as soon as any predicate is definitely false
    for s in skeletons {
        if eval_skel(s, assignment) == Some(false) {
            return None;
        }
    }
    if next == assignment.len() {
        if skeletons
            .iter()
            .any(|s| eval_skel(s, assignment) != Some(true))
        {
            return None;
        }
        return match theory_check(ctx, symbols, config, assignment) {
            TheoryOutcome::Feasible(model) => Some(model),
            TheoryOutcome::Infeasible => None,
            TheoryOutcome::Unknown(reason) => {
                if best_unknown.is_none() {
                    *best_unknown = Some(reason);
                }
                None
            }
        };
    }
    for value in [false, true] {
        assignment[next] = Some(value);
        if let Some(model) = enumerate_atoms(
            skeletons,
            ctx,
            symbols,
            config,
            assignment,
            next + 1,
            best_unknown,
        ) {
            return Some(model);
        }
    }
    assignment[next] = None;
    None
}

// -- theory layer --

enum TheoryOutcome {
    Feasible(BTreeMap<String, Value>),
    Infeasible,
    Unknown(String),
}

/// Σ coeff·var + constant over integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Lin {
    terms: BTreeMap<String, BigInt>,
    constant: BigInt,
}

impl Lin {
    fn constant(v: BigInt) -> Lin {
        Lin {
            terms: BTreeMap::new(),
            constant: v,
        }
    }

    fn var(name: &str) -> Lin {
        let mut terms = BTreeMap::new();
        terms.insert(name.to_string(), BigInt::one());
        Lin {
            terms,
            constant: BigInt::zero(),
        }
    }

    fn add(mut self, other: &Lin) -> Lin {
        for (k, v) in &other.terms {
            let e = self.terms.entry(k.clone()).or_insert_with(BigInt::zero);
            *e += v;
        }
        self.constant += &other.constant;
        self.normalize()
    }

    fn sub(mut self, other: &Lin) -> Lin {
        for (k, v) in &other.terms {
            let e = self.terms.entry(k.clone()).or_insert_with(BigInt::zero);
            *e -= v;
        }
        self.constant -= &other.constant;
        self.normalize()
    }

    fn scale(mut self, c: &BigInt) -> Lin {
        for v in self.terms.values_mut() {
            *v *= c;
        }
        self.constant *= c;
        self.normalize()
    }

    fn normalize(mut self) -> Lin {
        self.terms.retain(|_, v| !v.is_zero());
        self
    }

    fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Canonical constraint: `lin <= 0`, or `lin = 0` when `equality`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Constraint {
    lin: Lin,
    equality: bool,
}

#[derive(Default)]
struct TheoryBuilder {
    constraints: Vec<Constraint>,
    /// `lin != 0` constraints, expanded into sign splits later.
    disequalities: Vec<Lin>,
    aux_counter: usize,
    nonlinear: bool,
}

impl TheoryBuilder {
    fn linearize(&mut self, e: &Expr) -> Option<Lin> {
        match e {
            Expr::Int(v) => Some(Lin::constant(BigInt::from(v.clone()))),
            Expr::Sym(name) => Some(Lin::var(name)),
            Expr::Binary { op, left, right } => {
                let l = self.linearize(left)?;
                let r = self.linearize(right)?;
                match op {
                    BinOp::Add => Some(l.add(&r)),
                    BinOp::Sub => Some(l.sub(&r)),
                    BinOp::Mul => {
                        if l.is_constant() {
                            Some(r.scale(&l.constant))
                        } else if r.is_constant() {
                            Some(l.scale(&r.constant))
                        } else {
                            None
                        }
                    }
                    BinOp::Div => {
                        // a / k with constant k > 0: fresh quotient q with
                        // 0 <= a - k*q <= k - 1
                        if r.is_constant() && r.constant.is_positive() {
                            let q = format!("$div{}", self.aux_counter);
                            self.aux_counter += 1;
                            let qlin = Lin::var(&q);
                            let kq = qlin.clone().scale(&r.constant);
                            self.constraints.push(Constraint {
                                lin: kq.clone().sub(&l),
                                equality: false,
                            });
                            let mut upper = l.sub(&kq);
                            upper.constant -= &r.constant - BigInt::one();
                            self.constraints.push(Constraint {
                                lin: upper,
                                equality: false,
                            });
                            Some(qlin)
                        } else {
                            None
                        }
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Assert a comparison atom under the given polarity; false when the
    /// atom leaves the linear fragment.
    fn assert_cmp(&mut self, op: BinOp, left: &Expr, right: &Expr, polarity: bool) -> bool {
        let Some(l) = self.linearize(left) else {
            return false;
        };
        let Some(r) = self.linearize(right) else {
            return false;
        };
        let diff = l.sub(&r); // diff ⋈ 0
        let op = if polarity { op } else { negate_cmp(op) };
        match op {
            BinOp::Eq => self.constraints.push(Constraint {
                lin: diff,
                equality: true,
            }),
            BinOp::Ne => self.disequalities.push(diff),
            BinOp::Le => self.constraints.push(Constraint {
                lin: diff,
                equality: false,
            }),
            BinOp::Lt => {
                let mut lin = diff;
                lin.constant += BigInt::one();
                self.constraints.push(Constraint {
                    lin,
                    equality: false,
                });
            }
            BinOp::Ge => self.constraints.push(Constraint {
                lin: diff.scale(&BigInt::from(-1)),
                equality: false,
            }),
            BinOp::Gt => {
                let mut lin = diff.scale(&BigInt::from(-1));
                lin.constant += BigInt::one();
                self.constraints.push(Constraint {
                    lin,
                    equality: false,
                });
            }
            _ => return false,
        }
        true
    }
}

fn negate_cmp(op: BinOp) -> BinOp {
    match op {
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        BinOp::Lt => BinOp::Ge,
        BinOp::Le => BinOp::Gt,
        BinOp::Gt => BinOp::Le,
        BinOp::Ge => BinOp::Lt,
        other => other,
    }
}

fn theory_check(
    ctx: &Lowering,
    symbols: &SymbolTable,
    config: &SolverConfig,
    assignment: &[Option<bool>],
) -> TheoryOutcome {
    let mut builder = TheoryBuilder::default();
    let mut bool_model: BTreeMap<String, bool> = BTreeMap::new();

    for (idx, atom) in ctx.atoms.iter().enumerate() {
        let Some(polarity) = assignment[idx] else {
            continue;
        };
        match atom {
            Atom::Bool(name) => {
                bool_model.insert(name.clone(), polarity);
            }
            Atom::Cmp { op, left, right } => {
                if !builder.assert_cmp(*op, left, right, polarity) {
                    builder.nonlinear = true;
                }
            }
        }
    }

    if builder.nonlinear {
        return nonlinear_fallback(ctx, symbols, config, assignment, bool_model);
    }

    // width and domain side constraints
    let mut upper_bounds: BTreeMap<String, BigInt> = BTreeMap::new();
    let mut vars: BTreeSet<String> = BTreeSet::new();
    for c in &builder.constraints {
        vars.extend(c.lin.terms.keys().cloned());
    }
    for d in &builder.disequalities {
        vars.extend(d.terms.keys().cloned());
    }
    for name in &vars {
        if let Some(info) = symbols.get(name) {
            if let Some(width) = info.width {
                let bound = (BigInt::one() << width) - BigInt::one();
                upper_bounds.insert(name.clone(), bound);
            }
        }
        if let Some(max) = &config.domain_max {
            let bound = BigInt::from(max.clone());
            upper_bounds
                .entry(name.clone())
                .and_modify(|b| {
                    if bound < *b {
                        *b = bound.clone();
                    }
                })
                .or_insert(bound);
        }
    }

    solve_with_disequalities(
        &builder.constraints,
        &builder.disequalities,
        &upper_bounds,
        config,
        &bool_model,
        ctx,
    )
}

fn solve_with_disequalities(
    base: &[Constraint],
    disequalities: &[Lin],
    upper_bounds: &BTreeMap<String, BigInt>,
    config: &SolverConfig,
    bool_model: &BTreeMap<String, bool>,
    ctx: &Lowering,
) -> TheoryOutcome {
    let Some((first, rest)) = disequalities.split_first() else {
        return solve_linear(base, upper_bounds, config, bool_model, ctx);
    };
    let mut saw_unknown = None;
    // lin != 0  ->  lin <= -1  or  -lin <= -1
    for sign in [1i64, -1i64] {
        let mut lin = first.clone().scale(&BigInt::from(sign));
        lin.constant += BigInt::one();
        let mut constraints = base.to_vec();
        constraints.push(Constraint {
            lin,
            equality: false,
        });
        match solve_with_disequalities(&constraints, rest, upper_bounds, config, bool_model, ctx) {
            TheoryOutcome::Feasible(m) => return TheoryOutcome::Feasible(m),
            TheoryOutcome::Unknown(r) => saw_unknown = Some(r),
            TheoryOutcome::Infeasible => {}
        }
    }
    match saw_unknown {
        Some(r) => TheoryOutcome::Unknown(r),
        None => TheoryOutcome::Infeasible,
    }
}

fn solve_linear(
    constraints: &[Constraint],
    upper_bounds: &BTreeMap<String, BigInt>,
    config: &SolverConfig,
    bool_model: &BTreeMap<String, bool>,
    ctx: &Lowering,
) -> TheoryOutcome {
    // inequality rows only (lin <= 0); equalities split into two rows
    let mut rows: Vec<Lin> = Vec::new();
    for c in constraints {
        rows.push(c.lin.clone());
        if c.equality {
            rows.push(c.lin.clone().scale(&BigInt::from(-1)));
        }
    }
    let mut vars: BTreeSet<String> = BTreeSet::new();
    for r in &rows {
        vars.extend(r.terms.keys().cloned());
    }
    // declared upper bounds as rows: x - b <= 0
    for (name, bound) in upper_bounds {
        if vars.contains(name) {
            let mut lin = Lin::var(name);
            lin.constant = -bound.clone();
            rows.push(lin);
        }
    }
    // non-negativity: -x <= 0
    for name in &vars {
        rows.push(Lin::var(name).scale(&BigInt::from(-1)));
    }

    for r in &rows {
        if r.is_constant() && r.constant.is_positive() {
            return TheoryOutcome::Infeasible;
        }
    }

    if !fourier_motzkin_feasible(rows.clone()) {
        return TheoryOutcome::Infeasible;
    }

    match integer_search(&rows, &vars, config) {
        SearchOutcome::Found(numeric) => {
            let mut model: BTreeMap<String, Value> = BTreeMap::new();
            for (name, v) in numeric {
                if name.starts_with('$') {
                    continue; // auxiliary division variables
                }
                model.insert(name, Value::Int(v.to_biguint().unwrap_or_default()));
            }
            for (name, b) in bool_model {
                model.insert(name.clone(), Value::Bool(*b));
            }
            // defaults for symbols the theory never constrained
            for (name, sort) in ctx.lowered_maps.iter() {
                model.entry(name.clone()).or_insert(match sort {
                    Sort::Bool => Value::Bool(false),
                    _ => Value::zero(),
                });
            }
            for (name, info) in ctx.symbols.iter() {
                model.entry(name.clone()).or_insert(match info.sort {
                    Sort::Bool => Value::Bool(false),
                    _ => Value::zero(),
                });
            }
            TheoryOutcome::Feasible(model)
        }
        SearchOutcome::Infeasible => TheoryOutcome::Infeasible,
        SearchOutcome::Inconclusive => {
            TheoryOutcome::Unknown("integer search exhausted its budget".into())
        }
    }
}

/// Rational feasibility of `rows` (each `lin <= 0`); non-negativity rows are
/// already included. Rational infeasibility implies integer infeasibility,
/// so a `false` here is a sound Unsat argument.
fn fourier_motzkin_feasible(mut rows: Vec<Lin>) -> bool {
    const ROW_CAP: usize = 4000;
    loop {
        if rows
            .iter()
            .any(|r| r.terms.is_empty() && r.constant.is_positive())
        {
            return false;
        }
        rows.retain(|r| !r.terms.is_empty());
        rows.sort();
        rows.dedup();
        let Some(var) = rows.iter().flat_map(|r| r.terms.keys()).next().cloned() else {
            return true;
        };
        let mut pos: Vec<Lin> = Vec::new();
        let mut neg: Vec<Lin> = Vec::new();
        let mut rest: Vec<Lin> = Vec::new();
        for r in rows {
            match r.terms.get(&var) {
                Some(c) if c.is_positive() => pos.push(r),
                Some(_) => neg.push(r),
                None => rest.push(r),
            }
        }
        for p in &pos {
            for n in &neg {
                let pc = p.terms[&var].clone();
                let nc = -n.terms[&var].clone();
                // nc * p + pc * n eliminates var; both multipliers positive
                let combined = p.clone().scale(&nc).add(&n.clone().scale(&pc));
                debug_assert!(!combined.terms.contains_key(&var));
                if combined.terms.is_empty() {
                    if combined.constant.is_positive() {
                        return false;
                    }
                } else {
                    rest.push(combined);
                }
                if rest.len() > ROW_CAP {
                    // too wide; let the integer search have the final word
                    return true;
                }
            }
        }
        rows = rest;
    }
}

enum SearchOutcome {
    Found(BTreeMap<String, BigInt>),
    Infeasible,
    Inconclusive,
}

#[derive(Clone)]
struct Interval {
    low: BigInt,
    high: Option<BigInt>,
}

/// Ascending depth-first search with interval propagation. Exhausting a
/// fully finite space is decisive; truncating an unbounded range or blowing
/// the node budget is not.
fn integer_search(rows: &[Lin], vars: &BTreeSet<String>, config: &SolverConfig) -> SearchOutcome {
    let order: Vec<String> = vars.iter().cloned().collect();
    if order.is_empty() {
        return SearchOutcome::Found(BTreeMap::new());
    }

    // search ceiling for unbounded variables, from the constraint constants
    let max_const = rows
        .iter()
        .map(|r| r.constant.abs())
        .max()
        .unwrap_or_else(BigInt::zero);
    let ceiling: BigInt = max_const * 2 + BigInt::from(64);

    fn propagate(
        rows: &[Lin],
        fixed: &BTreeMap<String, BigInt>,
        intervals: &mut BTreeMap<String, Interval>,
    ) -> bool {
        for _ in 0..64 {
            let mut changed = false;
            for row in rows {
                // Σ c_i x_i + k <= 0  ->  Σ c_i x_i <= -k
                let mut residual = -row.constant.clone();
                let mut free: Vec<(&String, &BigInt)> = Vec::new();
                for (name, coeff) in &row.terms {
                    match fixed.get(name) {
                        Some(v) => residual -= coeff * v,
                        None => free.push((name, coeff)),
                    }
                }
                if free.is_empty() {
                    if residual.is_negative() {
                        return false;
                    }
                    continue;
                }
                for (name, coeff) in &free {
                    // minimum contribution of the other free variables
                    let mut other_min = BigInt::zero();
                    let mut unbounded = false;
                    for (oname, ocoeff) in &free {
                        if oname == name {
                            continue;
                        }
                        let iv = &intervals[oname.as_str()];
                        if ocoeff.is_positive() {
                            other_min += *ocoeff * &iv.low;
                        } else {
                            match &iv.high {
                                Some(h) => other_min += *ocoeff * h,
                                None => {
                                    unbounded = true;
                                    break;
                                }
                            }
                        }
                    }
                    if unbounded {
                        continue;
                    }
                    let budget = &residual - &other_min;
                    let iv = intervals.get_mut(name.as_str()).expect("interval exists");
                    if coeff.is_positive() {
                        let bound = budget.div_floor(coeff);
                        if iv.high.as_ref().map_or(true, |h| bound < *h) {
                            iv.high = Some(bound);
                            changed = true;
                        }
                    } else {
                        let bound = budget.div_ceil(coeff);
                        if bound > iv.low {
                            iv.low = bound;
                            changed = true;
                        }
                    }
                }
            }
            for iv in intervals.values() {
                if let Some(h) = &iv.high {
                    if *h < iv.low {
                        return false;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
        true
    }

    struct Search<'a> {
        rows: &'a [Lin],
        order: &'a [String],
        ceiling: &'a BigInt,
        nodes: u64,
        cap: u64,
        truncated: bool,
    }

    impl Search<'_> {
        fn go(
            &mut self,
            idx: usize,
            fixed: &mut BTreeMap<String, BigInt>,
            intervals: &BTreeMap<String, Interval>,
        ) -> Option<BTreeMap<String, BigInt>> {
            if idx == self.order.len() {
                return Some(fixed.clone());
            }
            let var = &self.order[idx];
            let iv = intervals[var].clone();
            let (high, finite) = match iv.high {
                Some(h) => (h, true),
                None => (std::cmp::max(self.ceiling.clone(), iv.low.clone()), false),
            };
            let mut v = iv.low.clone();
            while v <= high {
                self.nodes += 1;
                if self.nodes > self.cap {
                    self.truncated = true;
                    return None;
                }
                fixed.insert(var.clone(), v.clone());
                let mut next_intervals = intervals.clone();
                if propagate(self.rows, fixed, &mut next_intervals) {
                    if let Some(m) = self.go(idx + 1, fixed, &next_intervals) {
                        return Some(m);
                    }
                    if self.truncated {
                        return None;
                    }
                }
                fixed.remove(var);
                v += 1;
            }
            if !finite {
                self.truncated = true;
            }
            None
        }
    }

    let mut intervals: BTreeMap<String, Interval> = order
        .iter()
        .map(|v| {
            (
                v.clone(),
                Interval {
                    low: BigInt::zero(),
                    high: None,
                },
            )
        })
        .collect();
    let mut fixed = BTreeMap::new();
    if !propagate(rows, &fixed, &mut intervals) {
        return SearchOutcome::Infeasible;
    }

    let mut search = Search {
        rows,
        order: &order,
        ceiling: &ceiling,
        nodes: 0,
        cap: config.search_node_cap,
        truncated: false,
    };
    match search.go(0, &mut fixed, &intervals) {
        Some(model) => SearchOutcome::Found(model),
        None if search.truncated => SearchOutcome::Inconclusive,
        None => SearchOutcome::Infeasible,
    }
}

/// Bounded enumeration for atom sets outside the linear fragment: attempted
/// only for small symbol counts over a small space; inconclusive results are
/// `Unknown`, never `Unsat`.
fn nonlinear_fallback(
    ctx: &Lowering,
    symbols: &SymbolTable,
    config: &SolverConfig,
    assignment: &[Option<bool>],
    bool_model: BTreeMap<String, bool>,
) -> TheoryOutcome {
    let mut numeric_syms: BTreeSet<String> = BTreeSet::new();
    for (idx, atom) in ctx.atoms.iter().enumerate() {
        if assignment[idx].is_none() {
            continue;
        }
        if let Atom::Cmp { left, right, .. } = atom {
            let mut names = Vec::new();
            left.symbols(&mut names);
            right.symbols(&mut names);
            for n in names {
                let is_bool = symbols
                    .get(n)
                    .map(|i| i.sort == Sort::Bool)
                    .unwrap_or(false);
                if !is_bool {
                    numeric_syms.insert(n.to_string());
                }
            }
        }
    }
    if numeric_syms.len() > config.nonlinear_max_symbols {
        return TheoryOutcome::Unknown(format!(
            "nonlinear constraint over {} symbols",
            numeric_syms.len()
        ));
    }
    let per_var = (config.nonlinear_max_space as f64)
        .powf(1.0 / numeric_syms.len().max(1) as f64)
        .floor()
        .to_u64()
        .unwrap_or(0);
    if per_var == 0 {
        return TheoryOutcome::Unknown("nonlinear enumeration space too large".into());
    }

    let names: Vec<String> = numeric_syms.into_iter().collect();
    let mut values: Vec<u64> = vec![0; names.len()];
    loop {
        let mut model: BTreeMap<String, Value> = bool_model
            .iter()
            .map(|(k, v)| (k.clone(), Value::Bool(*v)))
            .collect();
        for (name, v) in names.iter().zip(&values) {
            model.insert(name.clone(), Value::Int(BigUint::from(*v)));
        }
        let mut ok = true;
        for (idx, atom) in ctx.atoms.iter().enumerate() {
            let Some(polarity) = assignment[idx] else {
                continue;
            };
            if let Atom::Cmp { op, left, right } = atom {
                let e = Expr::bin(*op, left.clone(), right.clone());
                match eval_truth(&e, &model) {
                    Some(t) if t == polarity => {}
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok {
            for (name, info) in ctx.symbols.iter() {
                model.entry(name.clone()).or_insert(match info.sort {
                    Sort::Bool => Value::Bool(false),
                    _ => Value::zero(),
                });
            }
            return TheoryOutcome::Feasible(model);
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == values.len() {
                return TheoryOutcome::Unknown(
                    "bounded nonlinear enumeration found no model".into(),
                );
            }
            values[pos] += 1;
            if values[pos] < per_var {
                break;
            }
            values[pos] = 0;
            pos += 1;
        }
    }
}
