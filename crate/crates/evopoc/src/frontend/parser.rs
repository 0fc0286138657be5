//! Recursive-descent parser for the supported Solidity subset.
//!
//! Constructs outside the subset become opaque statements or skipped contract
//! items; they are preserved, never silently dropped. Hard parse errors are
//! reserved for files that cannot be tokenized or scanned at all.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::FrontendError;

pub fn parse_project(sources: &[(String, String)]) -> Result<ProjectModel, FrontendError> {
    if sources.is_empty() {
        return Err(FrontendError::NoContracts);
    }
    let mut model = ProjectModel {
        files: Vec::new(),
        contracts: Vec::new(),
    };
    for (path, text) in sources {
        let file = model.files.len();
        model.files.push(path.clone());
        let tokens = lex(file, text)?;
        let mut p = Parser {
            file,
            tokens: &tokens,
            pos: 0,
        };
        p.source_unit(&mut model)?;
    }
    if model.contracts.is_empty() {
        return Err(FrontendError::NoContracts);
    }
    normalize_contract_casts(&mut model);
    Ok(model)
}

/// Rewrite `Name(x)` calls into casts when `Name` is a known contract or
/// interface, so `IERC20(token).transfer(...)` reads as a cast + method call.
fn normalize_contract_casts(model: &mut ProjectModel) {
    let names: Vec<String> = model.contracts.iter().map(|c| c.name.clone()).collect();
    let is_contract = |name: &str| names.iter().any(|n| n == name);

    fn walk_expr(e: &mut Expr, is_contract: &dyn Fn(&str) -> bool) {
        if let Expr::Call { callee, args } = e {
            if args.len() == 1 {
                if let Expr::Ident(name) = callee.as_ref() {
                    if is_contract(name) {
                        let inner = args.remove(0);
                        *e = Expr::Cast {
                            ty: TypeTag::Named(name.clone()),
                            expr: Box::new(inner),
                        };
                        if let Expr::Cast { expr, .. } = e {
                            walk_expr(expr, is_contract);
                        }
                        return;
                    }
                }
            }
        }
        match e {
            Expr::Member { base, .. } => walk_expr(base, is_contract),
            Expr::Index { base, index } => {
                walk_expr(base, is_contract);
                walk_expr(index, is_contract);
            }
            Expr::Call { callee, args } => {
                walk_expr(callee, is_contract);
                for a in args {
                    walk_expr(a, is_contract);
                }
            }
            Expr::Cast { expr, .. } => walk_expr(expr, is_contract),
            Expr::New { args, .. } => {
                for a in args {
                    walk_expr(a, is_contract);
                }
            }
            Expr::Unary { operand, .. } => walk_expr(operand, is_contract),
            Expr::Binary { left, right, .. } => {
                walk_expr(left, is_contract);
                walk_expr(right, is_contract);
            }
            _ => {}
        }
    }

    fn walk_stmt(s: &mut Statement, is_contract: &dyn Fn(&str) -> bool) {
        match s {
            Statement::VarDecl { init: Some(e), .. } => walk_expr(e, is_contract),
            Statement::Assign { target, value, .. } => {
                walk_expr(target, is_contract);
                walk_expr(value, is_contract);
            }
            Statement::Require { condition, .. } | Statement::Assert { condition, .. } => {
                walk_expr(condition, is_contract)
            }
            Statement::If {
                condition,
                then_branch,
                else_branch,
                ..
            } => {
                walk_expr(condition, is_contract);
                for st in then_branch.iter_mut().chain(else_branch.iter_mut()) {
                    walk_stmt(st, is_contract);
                }
            }
            Statement::For {
                init,
                condition,
                body,
                ..
            } => {
                if let Some(i) = init {
                    walk_stmt(i, is_contract);
                }
                if let Some(c) = condition {
                    walk_expr(c, is_contract);
                }
                for st in body {
                    walk_stmt(st, is_contract);
                }
            }
            Statement::While {
                condition, body, ..
            } => {
                walk_expr(condition, is_contract);
                for st in body {
                    walk_stmt(st, is_contract);
                }
            }
            Statement::Return { value: Some(e), .. } => walk_expr(e, is_contract),
            Statement::Expr { expr, .. } => walk_expr(expr, is_contract),
            Statement::Scope { body, .. } => {
                for st in body {
                    walk_stmt(st, is_contract);
                }
            }
            _ => {}
        }
    }

    for contract in &mut model.contracts {
        for var in &mut contract.state_vars {
            if let Some(init) = &mut var.initializer {
                walk_expr(init, &is_contract);
            }
        }
        for m in &mut contract.modifiers {
            for st in &mut m.body {
                walk_stmt(st, &is_contract);
            }
        }
        for f in &mut contract.functions {
            if let Some(body) = &mut f.body {
                for st in body {
                    walk_stmt(st, &is_contract);
                }
            }
        }
    }
}

struct Parser<'a> {
    file: usize,
    tokens: &'a [Token],
    pos: usize,
}

const ELEMENTARY: &[&str] = &["bool", "address", "string", "bytes", "uint", "int"];
const LOCATIONS: &[&str] = &["memory", "calldata", "storage"];
const MUTABILITY: &[&str] = &["view", "pure", "payable", "constant"];

fn is_elementary_name(name: &str) -> bool {
    if ELEMENTARY.contains(&name) {
        return true;
    }
    for prefix in ["uint", "int", "bytes"] {
        if let Some(rest) = name.strip_prefix(prefix) {
            if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
                return true;
            }
        }
    }
    false
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn loc(&self) -> SourceLoc {
        let t = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        SourceLoc {
            file: self.file,
            line: t.line,
            col: t.col,
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if self.at_ident(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), FrontendError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => Err(self.err(format!("expected {what}, found {other:?}"))),
        }
    }

    fn err(&self, message: String) -> FrontendError {
        let loc = self.loc();
        FrontendError::Parse {
            file: loc.file,
            line: loc.line,
            col: loc.col,
            message,
        }
    }

    fn source_unit(&mut self, model: &mut ProjectModel) -> Result<(), FrontendError> {
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(()),
                Tok::Ident(word) => match word.as_str() {
                    "pragma" | "import" => {
                        while !matches!(self.peek(), Tok::Semi | Tok::Eof) {
                            self.bump();
                        }
                        self.eat(&Tok::Semi);
                    }
                    "abstract" => {
                        self.bump();
                    }
                    "contract" | "interface" | "library" => {
                        let contract = self.contract()?;
                        model.contracts.push(contract);
                    }
                    _ => {
                        // free functions, custom errors, constants: skip item
                        self.skip_item();
                    }
                },
                _ => {
                    self.bump();
                }
            }
        }
    }

    /// Skip one top-level item: to the matching semicolon or balanced braces.
    fn skip_item(&mut self) {
        loop {
            match self.peek() {
                Tok::Semi => {
                    self.bump();
                    return;
                }
                Tok::LBrace => {
                    self.skip_balanced_braces();
                    return;
                }
                Tok::Eof => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn skip_balanced_braces(&mut self) {
        debug_assert!(matches!(self.peek(), Tok::LBrace));
        let mut depth = 0usize;
        loop {
            match self.bump() {
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                Tok::Eof => return,
                _ => {}
            }
        }
    }

    fn contract(&mut self) -> Result<ContractDef, FrontendError> {
        let loc = self.loc();
        let kind = match self.expect_ident("contract keyword")?.as_str() {
            "interface" => ContractKind::Interface,
            "library" => ContractKind::Library,
            _ => ContractKind::Contract,
        };
        let name = self.expect_ident("contract name")?;
        let mut parents = Vec::new();
        if self.eat_ident("is") {
            loop {
                let parent = self.expect_ident("parent name")?;
                parents.push(parent);
                if self.eat(&Tok::LParen) {
                    let mut depth = 1;
                    while depth > 0 {
                        match self.bump() {
                            Tok::LParen => depth += 1,
                            Tok::RParen => depth -= 1,
                            Tok::Eof => return Err(self.err("unterminated parent args".into())),
                            _ => {}
                        }
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::LBrace, "`{` opening contract body")?;

        let mut contract = ContractDef {
            name,
            kind,
            parents,
            state_vars: Vec::new(),
            functions: Vec::new(),
            modifiers: Vec::new(),
            file: self.file,
            loc,
        };

        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(contract);
                }
                Tok::Eof => return Err(self.err("unterminated contract body".into())),
                Tok::Ident(word) => match word.as_str() {
                    "function" => {
                        self.bump();
                        let name = self.expect_ident("function name")?;
                        let fun = self.function_rest(name)?;
                        contract.functions.push(fun);
                    }
                    "constructor" | "receive" | "fallback" => {
                        let name = word.clone();
                        self.bump();
                        let fun = self.function_rest(name)?;
                        contract.functions.push(fun);
                    }
                    "modifier" => {
                        self.bump();
                        let m = self.modifier()?;
                        contract.modifiers.push(m);
                    }
                    "event" | "error" | "using" => {
                        self.skip_item();
                    }
                    "struct" | "enum" => {
                        self.bump();
                        self.skip_item();
                    }
                    _ => {
                        let var = self.state_var()?;
                        contract.state_vars.push(var);
                    }
                },
                _ => {
                    self.skip_item();
                }
            }
        }
    }

    fn state_var(&mut self) -> Result<StateVar, FrontendError> {
        let loc = self.loc();
        let ty = self.type_tag()?;
        let mut visibility = Visibility::Internal;
        loop {
            if self.at_ident("public") {
                visibility = Visibility::Public;
                self.bump();
            } else if self.at_ident("private") {
                visibility = Visibility::Private;
                self.bump();
            } else if self.at_ident("internal") {
                self.bump();
            } else if self.at_ident("constant") || self.at_ident("immutable") {
                self.bump();
            } else {
                break;
            }
        }
        let name = self.expect_ident("state variable name")?;
        let initializer = if self.eat(&Tok::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(&Tok::Semi, "`;` after state variable")?;
        Ok(StateVar {
            name,
            ty,
            visibility,
            initializer,
            loc,
        })
    }

    fn type_tag(&mut self) -> Result<TypeTag, FrontendError> {
        let mut base = match self.peek().clone() {
            Tok::Ident(word) if word == "mapping" => {
                self.bump();
                self.expect(&Tok::LParen, "`(` after mapping")?;
                let key = self.type_tag()?;
                self.expect(&Tok::Arrow, "`=>` in mapping type")?;
                let value = self.type_tag()?;
                self.expect(&Tok::RParen, "`)` closing mapping type")?;
                TypeTag::Mapping(Box::new(key), Box::new(value))
            }
            Tok::Ident(word) if is_elementary_name(&word) => {
                self.bump();
                elementary_type(&word)
            }
            Tok::Ident(word) => {
                self.bump();
                TypeTag::Named(word)
            }
            other => return Err(self.err(format!("expected type, found {other:?}"))),
        };
        if base == TypeTag::Address {
            self.eat_ident("payable");
        }
        while self.peek() == &Tok::LBracket {
            self.bump();
            if let Tok::Number(_) = self.peek() {
                self.bump(); // fixed-size arrays lose their length tag
            }
            self.expect(&Tok::RBracket, "`]` closing array type")?;
            base = TypeTag::Array(Box::new(base));
        }
        Ok(base)
    }

    fn param_list(&mut self) -> Result<Vec<Param>, FrontendError> {
        self.expect(&Tok::LParen, "`(` opening parameter list")?;
        let mut params = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(params);
        }
        loop {
            let ty = self.type_tag()?;
            let mut location = None;
            if let Tok::Ident(word) = self.peek() {
                if LOCATIONS.contains(&word.as_str()) {
                    location = Some(word.clone());
                    self.bump();
                }
            }
            let name = match self.peek() {
                Tok::Ident(w) if !LOCATIONS.contains(&w.as_str()) => {
                    let n = w.clone();
                    self.bump();
                    n
                }
                _ => String::new(),
            };
            params.push(Param { name, ty, location });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RParen, "`)` closing parameter list")?;
        Ok(params)
    }

    fn function_rest(&mut self, name: String) -> Result<FunctionDef, FrontendError> {
        let loc = self.loc();
        let params = self.param_list()?;
        let mut fun = FunctionDef {
            name,
            params,
            returns: Vec::new(),
            visibility: Visibility::Public,
            mutability: None,
            modifiers: Vec::new(),
            body: None,
            loc,
        };
        loop {
            match self.peek().clone() {
                Tok::Semi => {
                    self.bump();
                    return Ok(fun);
                }
                Tok::LBrace => {
                    fun.body = Some(self.block()?);
                    return Ok(fun);
                }
                Tok::Ident(word) => match word.as_str() {
                    "external" => {
                        fun.visibility = Visibility::External;
                        self.bump();
                    }
                    "public" => {
                        fun.visibility = Visibility::Public;
                        self.bump();
                    }
                    "internal" => {
                        fun.visibility = Visibility::Internal;
                        self.bump();
                    }
                    "private" => {
                        fun.visibility = Visibility::Private;
                        self.bump();
                    }
                    w if MUTABILITY.contains(&w) => {
                        fun.mutability = Some(w.to_string());
                        self.bump();
                    }
                    "virtual" => {
                        self.bump();
                    }
                    "override" => {
                        self.bump();
                        if self.eat(&Tok::LParen) {
                            while !matches!(self.peek(), Tok::RParen | Tok::Eof) {
                                self.bump();
                            }
                            self.eat(&Tok::RParen);
                        }
                    }
                    "returns" => {
                        self.bump();
                        fun.returns = self.param_list()?;
                    }
                    _ => {
                        // modifier invocation
                        self.bump();
                        let mut args = Vec::new();
                        if self.eat(&Tok::LParen) {
                            if !self.eat(&Tok::RParen) {
                                loop {
                                    args.push(self.expr()?);
                                    if !self.eat(&Tok::Comma) {
                                        break;
                                    }
                                }
                                self.expect(&Tok::RParen, "`)` closing modifier args")?;
                            }
                        }
                        fun.modifiers.push(ModifierInvocation { name: word, args });
                    }
                },
                other => return Err(self.err(format!("unexpected {other:?} in function header"))),
            }
        }
    }

    fn modifier(&mut self) -> Result<ModifierDef, FrontendError> {
        let loc = self.loc();
        let name = self.expect_ident("modifier name")?;
        let params = if self.peek() == &Tok::LParen {
            self.param_list()?
        } else {
            Vec::new()
        };
        let body = self.block()?;
        Ok(ModifierDef {
            name,
            params,
            body,
            loc,
        })
    }

    fn block(&mut self) -> Result<Vec<Statement>, FrontendError> {
        self.expect(&Tok::LBrace, "`{` opening block")?;
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(stmts);
                }
                Tok::Eof => return Err(self.err("unterminated block".into())),
                _ => stmts.push(self.statement()?),
            }
        }
    }

    fn block_or_single(&mut self) -> Result<Vec<Statement>, FrontendError> {
        if self.peek() == &Tok::LBrace {
            self.block()
        } else {
            Ok(vec![self.statement()?])
        }
    }

    fn statement(&mut self) -> Result<Statement, FrontendError> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::LBrace => {
                let body = self.block()?;
                return Ok(Statement::Scope { body, loc });
            }
            Tok::Ident(word) => match word.as_str() {
                "require" => {
                    self.bump();
                    self.expect(&Tok::LParen, "`(` after require")?;
                    let condition = self.expr()?;
                    let message = if self.eat(&Tok::Comma) {
                        match self.bump() {
                            Tok::Str(s) => Some(s),
                            _ => None,
                        }
                    } else {
                        None
                    };
                    self.expect(&Tok::RParen, "`)` closing require")?;
                    self.expect(&Tok::Semi, "`;` after require")?;
                    return Ok(Statement::Require {
                        condition,
                        message,
                        loc,
                    });
                }
                "assert" => {
                    self.bump();
                    self.expect(&Tok::LParen, "`(` after assert")?;
                    let condition = self.expr()?;
                    self.expect(&Tok::RParen, "`)` closing assert")?;
                    self.expect(&Tok::Semi, "`;` after assert")?;
                    return Ok(Statement::Assert { condition, loc });
                }
                "revert" => {
                    self.bump();
                    let mut message = None;
                    if self.eat(&Tok::LParen) {
                        if let Tok::Str(s) = self.peek().clone() {
                            self.bump();
                            message = Some(s);
                        } else {
                            while !matches!(self.peek(), Tok::RParen | Tok::Eof) {
                                self.bump();
                            }
                        }
                        self.expect(&Tok::RParen, "`)` closing revert")?;
                    }
                    self.expect(&Tok::Semi, "`;` after revert")?;
                    return Ok(Statement::Revert { message, loc });
                }
                "if" => {
                    self.bump();
                    self.expect(&Tok::LParen, "`(` after if")?;
                    let condition = self.expr()?;
                    self.expect(&Tok::RParen, "`)` closing if condition")?;
                    let then_branch = self.block_or_single()?;
                    let else_branch = if self.eat_ident("else") {
                        self.block_or_single()?
                    } else {
                        Vec::new()
                    };
                    return Ok(Statement::If {
                        condition,
                        then_branch,
                        else_branch,
                        loc,
                    });
                }
                "for" => {
                    self.bump();
                    self.expect(&Tok::LParen, "`(` after for")?;
                    let init = if self.eat(&Tok::Semi) {
                        None
                    } else {
                        Some(Box::new(self.simple_statement_no_semi()?))
                    };
                    if init.is_some() {
                        self.expect(&Tok::Semi, "`;` after for-init")?;
                    }
                    let condition = if self.peek() == &Tok::Semi {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    self.expect(&Tok::Semi, "`;` after for-condition")?;
                    let update = if self.peek() == &Tok::RParen {
                        None
                    } else {
                        let start = self.pos;
                        let mut depth = 0usize;
                        loop {
                            match self.peek() {
                                Tok::LParen => depth += 1,
                                Tok::RParen if depth == 0 => break,
                                Tok::RParen => depth -= 1,
                                Tok::Eof => break,
                                _ => {}
                            }
                            self.bump();
                        }
                        Some(render_tokens(&self.tokens[start..self.pos]))
                    };
                    self.expect(&Tok::RParen, "`)` closing for header")?;
                    let body = self.block_or_single()?;
                    return Ok(Statement::For {
                        init,
                        condition,
                        update,
                        body,
                        loc,
                    });
                }
                "while" => {
                    self.bump();
                    self.expect(&Tok::LParen, "`(` after while")?;
                    let condition = self.expr()?;
                    self.expect(&Tok::RParen, "`)` closing while condition")?;
                    let body = self.block_or_single()?;
                    return Ok(Statement::While {
                        condition,
                        body,
                        loc,
                    });
                }
                "return" => {
                    self.bump();
                    let value = if self.peek() == &Tok::Semi {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    self.expect(&Tok::Semi, "`;` after return")?;
                    return Ok(Statement::Return { value, loc });
                }
                "_" => {
                    if self.peek_at(1) == &Tok::Semi {
                        self.bump();
                        self.bump();
                        return Ok(Statement::Placeholder { loc });
                    }
                }
                "unchecked" => {
                    self.bump();
                    let body = self.block()?;
                    return Ok(Statement::Scope { body, loc });
                }
                "assembly" | "emit" | "delete" | "break" | "continue" | "try" | "do" => {
                    return Ok(self.opaque_statement(loc));
                }
                _ => {}
            },
            _ => {}
        }

        // variable declaration vs expression statement
        if self.looks_like_var_decl() {
            let stmt = self.simple_statement_no_semi()?;
            self.expect(&Tok::Semi, "`;` after declaration")?;
            return Ok(stmt);
        }
        let start = self.pos;
        match self.try_expr_statement(loc) {
            Ok(stmt) => Ok(stmt),
            Err(_) => {
                self.pos = start;
                Ok(self.opaque_statement(loc))
            }
        }
    }

    /// Declaration or assignment without the trailing semicolon (for-init).
    fn simple_statement_no_semi(&mut self) -> Result<Statement, FrontendError> {
        let loc = self.loc();
        if self.looks_like_var_decl() {
            let ty = self.type_tag()?;
            let mut location = None;
            if let Tok::Ident(word) = self.peek() {
                if LOCATIONS.contains(&word.as_str()) {
                    location = Some(word.clone());
                    self.bump();
                }
            }
            let name = self.expect_ident("variable name")?;
            let init = if self.eat(&Tok::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            return Ok(Statement::VarDecl {
                ty,
                location,
                name,
                init,
                loc,
            });
        }
        let target = self.expr()?;
        let op = match self.peek() {
            Tok::Assign => AssignOp::Assign,
            Tok::AddAssign => AssignOp::AddAssign,
            Tok::SubAssign => AssignOp::SubAssign,
            _ => return Err(self.err("expected assignment in for-init".into())),
        };
        self.bump();
        let value = self.expr()?;
        Ok(Statement::Assign {
            target,
            op,
            value,
            loc,
        })
    }

    fn try_expr_statement(&mut self, loc: SourceLoc) -> Result<Statement, FrontendError> {
        let expr = self.expr()?;
        match self.peek() {
            Tok::Assign | Tok::AddAssign | Tok::SubAssign => {
                let op = match self.bump() {
                    Tok::Assign => AssignOp::Assign,
                    Tok::AddAssign => AssignOp::AddAssign,
                    _ => AssignOp::SubAssign,
                };
                let value = self.expr()?;
                self.expect(&Tok::Semi, "`;` after assignment")?;
                Ok(Statement::Assign {
                    target: expr,
                    op,
                    value,
                    loc,
                })
            }
            Tok::Semi => {
                self.bump();
                Ok(Statement::Expr { expr, loc })
            }
            other => Err(self.err(format!("unexpected {other:?} after expression"))),
        }
    }

    /// Consume one statement's worth of tokens (to `;`, balancing braces) and
    /// keep the canonical text.
    fn opaque_statement(&mut self, loc: SourceLoc) -> Statement {
        let start = self.pos;
        let mut brace_depth = 0usize;
        loop {
            match self.peek() {
                Tok::Semi if brace_depth == 0 => {
                    self.bump();
                    break;
                }
                Tok::LBrace => {
                    brace_depth += 1;
                    self.bump();
                }
                Tok::RBrace => {
                    if brace_depth == 0 {
                        break; // end of enclosing block; statement had no `;`
                    }
                    brace_depth -= 1;
                    self.bump();
                    if brace_depth == 0 {
                        // `assembly { ... }` style: done unless a `;` follows
                        if self.peek() == &Tok::Semi {
                            self.bump();
                        }
                        break;
                    }
                }
                Tok::Eof => break,
                _ => {
                    self.bump();
                }
            }
        }
        Statement::Opaque {
            text: render_tokens(&self.tokens[start..self.pos]),
            loc,
        }
    }

    fn looks_like_var_decl(&self) -> bool {
        match self.peek() {
            Tok::Ident(word) if word == "mapping" => true,
            Tok::Ident(word) if is_elementary_name(word) => true,
            Tok::Ident(_) => {
                // `Name x`, `Name memory x`, `Name[] x`
                let mut off = 1usize;
                if self.peek_at(off) == &Tok::LBracket {
                    if self.peek_at(off + 1) != &Tok::RBracket {
                        return false;
                    }
                    off += 2;
                }
                match self.peek_at(off) {
                    Tok::Ident(w) if LOCATIONS.contains(&w.as_str()) => {
                        matches!(self.peek_at(off + 1), Tok::Ident(_))
                    }
                    Tok::Ident(_) => matches!(
                        self.peek_at(off + 1),
                        Tok::Assign | Tok::Semi | Tok::Comma | Tok::RParen
                    ),
                    _ => false,
                }
            }
            _ => false,
        }
    }

    // -- expressions (precedence climbing) --

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary_expr(0)
    }

    fn binary_expr(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut left = self.unary_expr()?;
        loop {
            let (op, prec) = match self.peek() {
                Tok::OrOr => (BinOp::Or, 1),
                Tok::AndAnd => (BinOp::And, 2),
                Tok::EqEq => (BinOp::Eq, 3),
                Tok::NotEq => (BinOp::Ne, 3),
                Tok::Lt => (BinOp::Lt, 4),
                Tok::Le => (BinOp::Le, 4),
                Tok::Gt => (BinOp::Gt, 4),
                Tok::Ge => (BinOp::Ge, 4),
                Tok::Plus => (BinOp::Add, 5),
                Tok::Minus => (BinOp::Sub, 5),
                Tok::Star => (BinOp::Mul, 6),
                Tok::Slash => (BinOp::Div, 6),
                Tok::Percent => (BinOp::Mod, 6),
                Tok::StarStar => (BinOp::Pow, 7),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            self.bump();
            // `**` is right-associative
            let next_min = if op == BinOp::Pow { prec } else { prec + 1 };
            let right = self.binary_expr(next_min)?;
            left = Expr::Binary {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn unary_expr(&mut self) -> Result<Expr, FrontendError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Expr::Unary {
                    op: UnOp::Not,
                    operand: Box::new(self.unary_expr()?),
                })
            }
            Tok::Minus => {
                self.bump();
                Ok(Expr::Unary {
                    op: UnOp::Neg,
                    operand: Box::new(self.unary_expr()?),
                })
            }
            _ => self.postfix_expr(),
        }
    }

    fn postfix_expr(&mut self) -> Result<Expr, FrontendError> {
        let mut expr = self.primary_expr()?;
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    let member = self.expect_ident("member name")?;
                    expr = Expr::Member {
                        base: Box::new(expr),
                        member,
                    };
                }
                Tok::LBracket => {
                    self.bump();
                    let index = self.expr()?;
                    self.expect(&Tok::RBracket, "`]` closing index")?;
                    expr = Expr::Index {
                        base: Box::new(expr),
                        index: Box::new(index),
                    };
                }
                Tok::LParen => {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(&Tok::RParen, "`)` closing call")?;
                    }
                    expr = Expr::Call {
                        callee: Box::new(expr),
                        args,
                    };
                }
                _ => return Ok(expr),
            }
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, FrontendError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(Expr::Number(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)` closing parenthesized expression")?;
                Ok(inner)
            }
            Tok::Ident(word) => match word.as_str() {
                "true" => {
                    self.bump();
                    Ok(Expr::Bool(true))
                }
                "false" => {
                    self.bump();
                    Ok(Expr::Bool(false))
                }
                "new" => {
                    self.bump();
                    let ty = self.type_tag()?;
                    self.expect(&Tok::LParen, "`(` after new type")?;
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(&Tok::RParen, "`)` closing new args")?;
                    }
                    Ok(Expr::New { ty, args })
                }
                w if is_elementary_name(w) => {
                    // elementary-type cast: `address(0)`, `uint256(x)`
                    let ty = self.type_tag()?;
                    self.expect(&Tok::LParen, "`(` in type cast")?;
                    let inner = self.expr()?;
                    self.expect(&Tok::RParen, "`)` closing type cast")?;
                    Ok(Expr::Cast {
                        ty,
                        expr: Box::new(inner),
                    })
                }
                "payable" => {
                    self.bump();
                    self.expect(&Tok::LParen, "`(` after payable")?;
                    let inner = self.expr()?;
                    self.expect(&Tok::RParen, "`)` closing payable cast")?;
                    Ok(Expr::Cast {
                        ty: TypeTag::Address,
                        expr: Box::new(inner),
                    })
                }
                _ => {
                    self.bump();
                    Ok(Expr::Ident(word))
                }
            },
            other => Err(self.err(format!("unexpected {other:?} in expression"))),
        }
    }
}

fn elementary_type(word: &str) -> TypeTag {
    match word {
        "bool" => TypeTag::Bool,
        "address" => TypeTag::Address,
        "string" => TypeTag::Str,
        "bytes" => TypeTag::Bytes(None),
        "uint" => TypeTag::Uint(256),
        "int" => TypeTag::Int(256),
        _ => {
            if let Some(rest) = word.strip_prefix("uint") {
                TypeTag::Uint(rest.parse().unwrap_or(256))
            } else if let Some(rest) = word.strip_prefix("int") {
                TypeTag::Int(rest.parse().unwrap_or(256))
            } else if let Some(rest) = word.strip_prefix("bytes") {
                TypeTag::Bytes(rest.parse().ok())
            } else {
                TypeTag::Named(word.to_string())
            }
        }
    }
}

/// Canonical single-space token rendering; stable under re-lex + re-render.
pub fn render_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        let text = match &t.tok {
            Tok::Ident(w) => w.clone(),
            Tok::Number(n) => n.clone(),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::Semi => ";".into(),
            Tok::Comma => ",".into(),
            Tok::Dot => ".".into(),
            Tok::Arrow => "=>".into(),
            Tok::Assign => "=".into(),
            Tok::AddAssign => "+=".into(),
            Tok::SubAssign => "-=".into(),
            Tok::OrOr => "||".into(),
            Tok::AndAnd => "&&".into(),
            Tok::EqEq => "==".into(),
            Tok::NotEq => "!=".into(),
            Tok::Lt => "<".into(),
            Tok::Le => "<=".into(),
            Tok::Gt => ">".into(),
            Tok::Ge => ">=".into(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::StarStar => "**".into(),
            Tok::Slash => "/".into(),
            Tok::Percent => "%".into(),
            Tok::Bang => "!".into(),
            Tok::PlusPlus => "++".into(),
            Tok::MinusMinus => "--".into(),
            Tok::Other(c) => c.to_string(),
            Tok::Eof => continue,
        };
        let no_space_before = matches!(
            t.tok,
            Tok::Semi
                | Tok::Comma
                | Tok::RParen
                | Tok::RBracket
                | Tok::Dot
                | Tok::LParen
                | Tok::LBracket
                | Tok::PlusPlus
                | Tok::MinusMinus
        );
        if !out.is_empty() && !no_space_before && !out.ends_with(['(', '[', '.']) {
            out.push(' ');
        }
        out.push_str(&text);
    }
    out
}
