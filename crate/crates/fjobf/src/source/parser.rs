//! Recursive-descent parser for the `.ssafj` concrete syntax.
//!
//! The grammar follows the listing style documented in `docs/grammar.md`:
//! a class body is `fields ; methods`, a method body is `locals ; blocks`,
//! and a block is an `L<n>:` label followed by either a control statement
//! or a run of assignments. Identifiers of the form `L<digits>` are
//! reserved for labels.

use super::ast::*;
use crate::common::{BinOp, Constant, Label, SrcPos, TypeName};
use crate::lexer::{lex, Cursor, Tok};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: SrcPos,
    pub msg: String,
}

pub fn parse_source(text: &str) -> Result<SourceProgram, ParseError> {
    let toks = lex(text).map_err(|e| ParseError {
        pos: e.pos,
        msg: e.msg,
    })?;
    let mut p = SrcParser {
        c: Cursor::new(toks),
    };
    p.program()
}

struct SrcParser {
    c: Cursor,
}

impl SrcParser {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.c.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, kind: &Tok) -> Result<(), ParseError> {
        if self.c.eat(kind) {
            Ok(())
        } else {
            match self.c.peek() {
                Some(t) => {
                    let t = t.clone();
                    self.err(format!("expected {kind}, found {t}"))
                }
                None => self.err(format!("expected {kind}, found end of input")),
            }
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.c.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.c.i += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    /// Identifier that is not a reserved label token.
    fn var_ident(&mut self) -> Result<String, ParseError> {
        let pos = self.c.pos();
        let s = self.ident()?;
        if Label::is_label_ident(&s) {
            return Err(ParseError {
                pos,
                msg: format!("`{s}` is reserved as a label name"),
            });
        }
        Ok(s)
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        match self.c.peek() {
            Some(Tok::Ident(s)) if Label::is_label_ident(s) => {
                let s = s.clone();
                self.c.i += 1;
                Ok(Label(s))
            }
            _ => self.err("expected label (`L<n>`)"),
        }
    }

    fn at_label_colon(&self) -> bool {
        matches!(self.c.peek(), Some(Tok::Ident(s)) if Label::is_label_ident(s))
            && self.c.peek_at(1) == Some(&Tok::Colon)
    }

    fn type_name(&mut self) -> Result<TypeName, ParseError> {
        let name = self.ident()?;
        Ok(match name.as_str() {
            "int" => TypeName::Int,
            "bool" => TypeName::Bool,
            "void" => TypeName::Void,
            "Exception" => TypeName::Exception,
            _ => TypeName::Class(name),
        })
    }

    fn program(&mut self) -> Result<SourceProgram, ParseError> {
        let mut classes = Vec::new();
        while !self.c.at_eof() {
            classes.push(self.class()?);
        }
        Ok(SourceProgram { classes })
    }

    fn class(&mut self) -> Result<SourceClass, ParseError> {
        let pos = self.c.pos();
        if !self.c.eat_ident("class") {
            return self.err("expected `class`");
        }
        let name = self.var_ident()?;
        self.expect(&Tok::LBrace)?;
        let mut fields = Vec::new();
        loop {
            if self.c.eat(&Tok::Semi) {
                break; // separator between field and method sections
            }
            let ty = self.type_name()?;
            fields.push((ty.clone(), self.var_ident()?));
            while self.c.eat(&Tok::Comma) {
                fields.push((ty.clone(), self.var_ident()?));
            }
            self.expect(&Tok::Semi)?;
        }
        let mut methods = Vec::new();
        while !self.c.eat(&Tok::RBrace) {
            methods.push(self.method()?);
        }
        Ok(SourceClass {
            name,
            fields,
            methods,
            pos,
        })
    }

    fn method(&mut self) -> Result<SourceMethod, ParseError> {
        let pos = self.c.pos();
        let ret_type = self.type_name()?;
        let name = self.var_ident()?;
        self.expect(&Tok::LParen)?;
        let pty = self.type_name()?;
        let pname = self.var_ident()?;
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::LBrace)?;
        let mut locals = Vec::new();
        loop {
            if self.c.eat(&Tok::Semi) {
                break;
            }
            let ty = self.type_name()?;
            locals.push((ty.clone(), self.var_ident()?));
            while self.c.eat(&Tok::Comma) {
                locals.push((ty.clone(), self.var_ident()?));
            }
            self.expect(&Tok::Semi)?;
        }
        let body = self.blocks_until_rbrace()?;
        if body.is_empty() {
            return self.err("method body must contain at least one block");
        }
        Ok(SourceMethod {
            ret_type,
            name,
            param: (pty, pname),
            locals,
            body,
            pos,
        })
    }

    /// Blocks until a closing `}` (consumed).
    fn blocks_until_rbrace(&mut self) -> Result<Vec<Block>, ParseError> {
        let mut blocks = Vec::new();
        let mut seen = std::collections::HashSet::new();
        while !self.c.eat(&Tok::RBrace) {
            let b = self.block()?;
            if !seen.insert(b.label.clone()) {
                return Err(ParseError {
                    pos: b.pos,
                    msg: format!("duplicate label `{}`", b.label),
                });
            }
            // Nested labels are checked for duplicates here too, against the
            // whole set collected so far at this nesting entry point.
            for l in b.labels().into_iter().skip(1) {
                if !seen.insert(l.clone()) {
                    return Err(ParseError {
                        pos: b.pos,
                        msg: format!("duplicate label `{l}`"),
                    });
                }
            }
            blocks.push(b);
        }
        Ok(blocks)
    }

    fn braced_blocks(&mut self, what: &str) -> Result<Vec<Block>, ParseError> {
        self.expect(&Tok::LBrace)?;
        let blocks = self.blocks_until_rbrace()?;
        if blocks.is_empty() {
            return self.err(format!("{what} must contain at least one block"));
        }
        Ok(blocks)
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        let pos = self.c.pos();
        let label = self.label()?;
        self.expect(&Tok::Colon)?;
        let body = self.block_body()?;
        Ok(Block { label, body, pos })
    }

    fn block_body(&mut self) -> Result<BlockBody, ParseError> {
        // Explicitly braced assignment run; `{ }` is the empty assigns block.
        if self.c.eat(&Tok::LBrace) {
            let mut assigns = Vec::new();
            while !self.c.eat(&Tok::RBrace) {
                match self.assign_stmt()? {
                    AssignOrCall::Assign(a) => assigns.push(a),
                    AssignOrCall::Call { .. } => {
                        return self.err("a method call must occupy a whole block")
                    }
                }
            }
            return Ok(BlockBody::Assigns(assigns));
        }
        if self.c.eat_ident("return") {
            let e = self.expr(false)?;
            self.expect(&Tok::Semi)?;
            return Ok(BlockBody::Return(e));
        }
        if self.c.eat_ident("throw") {
            let e = self.expr(false)?;
            self.expect(&Tok::Semi)?;
            return Ok(BlockBody::Throw(e));
        }
        if self.c.eat_ident("try") {
            let try_blocks = self.braced_blocks("try body")?;
            let raise_phis = self.join_clause()?;
            if !self.c.eat_ident("catch") {
                return self.err("expected `catch`");
            }
            self.expect(&Tok::LParen)?;
            let exn_type = self.type_name()?;
            let exn_var = self.var_ident()?;
            self.expect(&Tok::RParen)?;
            let catch_blocks = self.braced_blocks("catch body")?;
            let join_phis = self.join_clause()?;
            return Ok(BlockBody::TryCatch {
                try_blocks,
                raise_phis,
                exn_type,
                exn_var,
                catch_blocks,
                join_phis,
            });
        }
        if self.c.at_ident("join") {
            // `join { phis } while (e) { blocks }`
            let entry_phis = self.join_clause()?;
            if !self.c.eat_ident("while") {
                return self.err("expected `while` after `join` clause");
            }
            self.expect(&Tok::LParen)?;
            let cond = self.expr(false)?;
            self.expect(&Tok::RParen)?;
            let body = self.braced_blocks("while body")?;
            return Ok(BlockBody::While {
                entry_phis,
                cond,
                body,
            });
        }
        if self.c.eat_ident("while") {
            // While with no entry phis.
            self.expect(&Tok::LParen)?;
            let cond = self.expr(false)?;
            self.expect(&Tok::RParen)?;
            let body = self.braced_blocks("while body")?;
            return Ok(BlockBody::While {
                entry_phis: Vec::new(),
                cond,
                body,
            });
        }
        if self.c.eat_ident("if") {
            self.expect(&Tok::LParen)?;
            let cond = self.expr(false)?;
            self.expect(&Tok::RParen)?;
            let then_blocks = self.braced_blocks("then branch")?;
            if !self.c.eat_ident("else") {
                return self.err("expected `else`");
            }
            let else_blocks = self.braced_blocks("else branch")?;
            let join_phis = self.join_clause()?;
            return Ok(BlockBody::IfElse {
                cond,
                then_blocks,
                else_blocks,
                join_phis,
            });
        }
        self.assign_run()
    }

    fn join_clause(&mut self) -> Result<Vec<Phi>, ParseError> {
        if !self.c.eat_ident("join") {
            return self.err("expected `join`");
        }
        self.expect(&Tok::LBrace)?;
        let mut phis = Vec::new();
        while !self.c.eat(&Tok::RBrace) {
            let target = self.var_ident()?;
            self.expect(&Tok::Assign)?;
            if !self.c.eat_ident("phi") {
                return self.err("expected `phi`");
            }
            self.expect(&Tok::LParen)?;
            let mut operands = Vec::new();
            loop {
                let l = self.label()?;
                self.expect(&Tok::Colon)?;
                let x = self.var_ident()?;
                operands.push((l, x));
                if !self.c.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen)?;
            phis.push(Phi { target, operands });
            // Optional separator between phi assignments.
            self.c.eat(&Tok::Semi);
        }
        Ok(phis)
    }

    /// A run of assignment statements. A method call `x = e.m(e)` must be
    /// the sole statement of its block.
    fn assign_run(&mut self) -> Result<BlockBody, ParseError> {
        let mut assigns = Vec::new();
        loop {
            if self.at_label_colon() || self.c.at(&Tok::RBrace) || self.c.at_eof() {
                break;
            }
            let stmt = self.assign_stmt()?;
            match stmt {
                AssignOrCall::Assign(a) => assigns.push(a),
                AssignOrCall::Call {
                    target,
                    receiver,
                    method,
                    arg,
                } => {
                    if !assigns.is_empty() {
                        return self.err("a method call must occupy a whole block");
                    }
                    if !(self.at_label_colon() || self.c.at(&Tok::RBrace) || self.c.at_eof()) {
                        return self.err("a method call must occupy a whole block");
                    }
                    return Ok(BlockBody::MethodCall {
                        target,
                        receiver,
                        method,
                        arg,
                    });
                }
            }
        }
        if assigns.is_empty() {
            // An explicitly empty assigns block is written `{ }`.
            return self.err("expected a statement");
        }
        Ok(BlockBody::Assigns(assigns))
    }

    fn assign_stmt(&mut self) -> Result<AssignOrCall, ParseError> {
        // println(...) / System.out.println(...)
        if self.c.at_ident("println")
            || (self.c.at_ident("System")
                && self.c.peek_at(1) == Some(&Tok::Dot)
                && matches!(self.c.peek_at(2), Some(Tok::Ident(s)) if s == "out"))
        {
            if self.c.eat_ident("System") {
                self.expect(&Tok::Dot)?;
                if !self.c.eat_ident("out") {
                    return self.err("expected `out`");
                }
                self.expect(&Tok::Dot)?;
                if !self.c.eat_ident("println") {
                    return self.err("expected `println`");
                }
            } else {
                self.c.eat_ident("println");
            }
            self.expect(&Tok::LParen)?;
            let e = self.expr(true)?;
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::Semi)?;
            return Ok(AssignOrCall::Assign(Assignment::Print(e)));
        }
        // `x = ...` (variable assignment or method-call block) vs `e.f = e`.
        if let (Some(Tok::Ident(name)), Some(Tok::Assign)) = (self.c.peek(), self.c.peek_at(1)) {
            let name = name.clone();
            if Label::is_label_ident(&name) {
                return self.err(format!("`{name}` is reserved as a label name"));
            }
            self.c.i += 2;
            let rhs = self.expr(false)?;
            // A trailing `(` after a field chain means a method call.
            if self.c.at(&Tok::LParen) {
                if let Expr::Field(recv, m) = rhs {
                    self.expect(&Tok::LParen)?;
                    let arg = self.expr(false)?;
                    self.expect(&Tok::RParen)?;
                    self.expect(&Tok::Semi)?;
                    return Ok(AssignOrCall::Call {
                        target: name,
                        receiver: *recv,
                        method: m,
                        arg,
                    });
                }
                return self.err("calls may only appear as `x = e.m(e)`");
            }
            self.expect(&Tok::Semi)?;
            return Ok(AssignOrCall::Assign(Assignment::Var(name, rhs)));
        }
        // Field assignment `e.f = e;`
        let lhs = self.expr(false)?;
        match lhs {
            Expr::Field(recv, f) => {
                self.expect(&Tok::Assign)?;
                let rhs = self.expr(false)?;
                self.expect(&Tok::Semi)?;
                Ok(AssignOrCall::Assign(Assignment::Field(*recv, f, rhs)))
            }
            _ => self.err("expected an assignment statement"),
        }
    }

    /// Expressions: comparison over additive over postfix primaries.
    /// `allow_str` permits string literals (println arguments only).
    fn expr(&mut self, allow_str: bool) -> Result<Expr, ParseError> {
        let lhs = self.additive(allow_str)?;
        let op = match self.c.peek() {
            Some(Tok::Lt) => Some(BinOp::Lt),
            Some(Tok::Gt) => Some(BinOp::Gt),
            Some(Tok::EqEq) => Some(BinOp::Eq),
            _ => None,
        };
        if let Some(op) = op {
            self.c.i += 1;
            let rhs = self.additive(allow_str)?;
            return Ok(Expr::BinOp(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn additive(&mut self, allow_str: bool) -> Result<Expr, ParseError> {
        let mut e = self.primary(allow_str)?;
        loop {
            let op = match self.c.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.c.i += 1;
            let rhs = self.primary(allow_str)?;
            e = Expr::BinOp(op, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn primary(&mut self, allow_str: bool) -> Result<Expr, ParseError> {
        let e = match self.c.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.c.i += 1;
                Expr::Const(Constant::Int(n))
            }
            Some(Tok::Minus) => {
                self.c.i += 1;
                match self.c.peek() {
                    Some(Tok::Int(n)) => {
                        let n = *n;
                        self.c.i += 1;
                        Expr::Const(Constant::Int(-n))
                    }
                    _ => return self.err("expected integer literal after `-`"),
                }
            }
            Some(Tok::Str(s)) => {
                if !allow_str {
                    return self.err("string literals are only allowed in println arguments");
                }
                self.c.i += 1;
                Expr::Const(Constant::Str(s))
            }
            Some(Tok::LParen) => {
                self.c.i += 1;
                let e = self.expr(allow_str)?;
                self.expect(&Tok::RParen)?;
                e
            }
            Some(Tok::Ident(id)) => match id.as_str() {
                "true" => {
                    self.c.i += 1;
                    Expr::Const(Constant::Bool(true))
                }
                "false" => {
                    self.c.i += 1;
                    Expr::Const(Constant::Bool(false))
                }
                "null" => {
                    self.c.i += 1;
                    Expr::Const(Constant::Null)
                }
                "this" => {
                    self.c.i += 1;
                    Expr::This
                }
                "new" => {
                    self.c.i += 1;
                    let ty = self.type_name()?;
                    self.expect(&Tok::LParen)?;
                    self.expect(&Tok::RParen)?;
                    Expr::New(ty)
                }
                _ => {
                    let v = self.var_ident()?;
                    Expr::Var(v)
                }
            },
            _ => return self.err("expected expression"),
        };
        self.postfix(e)
    }

    fn postfix(&mut self, mut e: Expr) -> Result<Expr, ParseError> {
        while self.c.at(&Tok::Dot) {
            // Stop before `(`: `e.m(` is handled by the caller as a call.
            if self.c.peek_at(2) == Some(&Tok::LParen) {
                if let Some(Tok::Ident(_)) = self.c.peek_at(1) {
                    self.c.i += 1;
                    let m = self.ident()?;
                    e = Expr::Field(Box::new(e), m);
                    return Ok(e);
                }
            }
            self.c.i += 1;
            let f = self.var_ident()?;
            e = Expr::Field(Box::new(e), f);
        }
        Ok(e)
    }
}

enum AssignOrCall {
    Assign(Assignment),
    Call {
        target: String,
        receiver: Expr,
        method: String,
        arg: Expr,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_program() {
        let p = parse_source("class A { ; int id(int x){ ; L0: return x; } }").unwrap();
        assert_eq!(p.classes.len(), 1);
        assert_eq!(p.classes[0].methods.len(), 1);
        let m = &p.classes[0].methods[0];
        assert_eq!(m.name, "id");
        assert_eq!(m.body.len(), 1);
        assert!(matches!(m.body[0].body, BlockBody::Return(Expr::Var(ref v)) if v == "x"));
    }

    #[test]
    fn rejects_duplicate_labels() {
        let e = parse_source("class A { ; int id(int x){ ; L0: return x; L0: return x; } }")
            .unwrap_err();
        assert!(e.msg.contains("duplicate label"), "{e}");
    }

    #[test]
    fn parses_method_call_block_and_rejects_mixed() {
        let ok = parse_source("class A { ; int f(int x){ ; L0: y = this.g(x); L1: return y; } }");
        assert!(ok.is_ok(), "{ok:?}");
        let bad = parse_source(
            "class A { ; int f(int x){ ; L0: a = 1; y = this.g(x); L1: return y; } }",
        );
        assert!(bad.unwrap_err().msg.contains("whole block"));
    }

    #[test]
    fn rejects_string_outside_print() {
        let bad = parse_source("class A { ; int f(int x){ ; L0: a = \"s\"; L1: return x; } }");
        assert!(bad.is_err());
        let ok = parse_source(
            "class A { ; int f(int x){ ; L0: println(\"v=\" + x); L1: return x; } }",
        );
        assert!(ok.is_ok(), "{ok:?}");
    }

    #[test]
    fn parses_join_while_and_if() {
        let text = "class A { ; int f(int x){ int a_1, a_2, a_3; ;
            L0: a_1 = 0;
            L1: join { a_2 = phi(L0:a_1, L2:a_3) } while (a_2 < x) {
                L2: a_3 = a_2 + 1;
            }
            L3: return a_2; } }";
        let p = parse_source(text).unwrap();
        let m = &p.classes[0].methods[0];
        assert_eq!(m.body.len(), 3);
        match &m.body[1].body {
            BlockBody::While { entry_phis, .. } => {
                assert_eq!(entry_phis.len(), 1);
                assert_eq!(entry_phis[0].operands.len(), 2);
            }
            other => panic!("expected while, got {other:?}"),
        }
    }
}
