//! Abstract syntax of SSAFJ-EH: classes of single-argument methods whose
//! bodies are labeled blocks in structured SSA form, with `join { phi }`
//! clauses on if-else, while, and try-catch.

use crate::common::{BinOp, Constant, Label, SrcPos, TypeName};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub classes: Vec<SourceClass>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceClass {
    pub name: String,
    pub fields: Vec<(TypeName, String)>,
    pub methods: Vec<SourceMethod>,
    pub pos: SrcPos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceMethod {
    pub ret_type: TypeName,
    pub name: String,
    /// Exactly one formal parameter.
    pub param: (TypeName, String),
    pub locals: Vec<(TypeName, String)>,
    pub body: Vec<Block>,
    pub pos: SrcPos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub label: Label,
    pub body: BlockBody,
    pub pos: SrcPos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockBody {
    Assigns(Vec<Assignment>),
    Return(Expr),
    Throw(Expr),
    /// `x = e.m(e)` — a method call occupies a whole block.
    MethodCall {
        target: String,
        receiver: Expr,
        method: String,
        arg: Expr,
    },
    TryCatch {
        try_blocks: Vec<Block>,
        /// `join` between try and catch: merges values per raising label.
        raise_phis: Vec<Phi>,
        exn_type: TypeName,
        exn_var: String,
        catch_blocks: Vec<Block>,
        /// `join` after the catch: merges the normal exits of try and catch.
        join_phis: Vec<Phi>,
    },
    While {
        entry_phis: Vec<Phi>,
        cond: Expr,
        body: Vec<Block>,
    },
    IfElse {
        cond: Expr,
        then_blocks: Vec<Block>,
        else_blocks: Vec<Block>,
        join_phis: Vec<Phi>,
    },
}

/// `x = phi(l1:x1, ..., ln:xn)` — selects the operand whose label matches
/// the dynamically preceding block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phi {
    pub target: String,
    pub operands: Vec<(Label, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assignment {
    Var(String, Expr),
    Field(Expr, String, Expr),
    /// `println(e)` — built-in output primitive.
    Print(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(Constant),
    Var(String),
    Field(Box<Expr>, String),
    New(TypeName),
    This,
    BinOp(BinOp, Box<Expr>, Box<Expr>),
}

impl SourceProgram {
    pub fn class(&self, name: &str) -> Option<&SourceClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn method(&self, class: &str, method: &str) -> Option<&SourceMethod> {
        self.class(class)
            .and_then(|c| c.methods.iter().find(|m| m.name == method))
    }
}

impl Block {
    /// All labels appearing in this block, including nested ones.
    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut Vec<Label>) {
        out.push(self.label.clone());
        match &self.body {
            BlockBody::TryCatch {
                try_blocks,
                catch_blocks,
                ..
            } => {
                for b in try_blocks.iter().chain(catch_blocks) {
                    b.collect_labels(out);
                }
            }
            BlockBody::While { body, .. } => {
                for b in body {
                    b.collect_labels(out);
                }
            }
            BlockBody::IfElse {
                then_blocks,
                else_blocks,
                ..
            } => {
                for b in then_blocks.iter().chain(else_blocks) {
                    b.collect_labels(out);
                }
            }
            _ => {}
        }
    }
}

pub fn method_labels(md: &SourceMethod) -> Vec<Label> {
    let mut out = Vec::new();
    for b in &md.body {
        b.collect_labels(&mut out);
    }
    out
}
