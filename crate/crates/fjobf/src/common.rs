//! Syntax atoms shared by the source and target languages.

use std::fmt;

/// Position in a source file, 1-based.
///
/// Positions are layout metadata: two ASTs that differ only in positions are
/// considered structurally equal, so `PartialEq`/`Hash` ignore the fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct SrcPos {
    pub line: u32,
    pub col: u32,
}

impl SrcPos {
    pub fn new(line: u32, col: u32) -> Self {
        SrcPos { line, col }
    }
}

impl PartialEq for SrcPos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for SrcPos {}

impl std::hash::Hash for SrcPos {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for SrcPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Basic types. `Exception` is a built-in class with no fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeName {
    Int,
    Bool,
    Void,
    Exception,
    Class(String),
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeName::Int => write!(f, "int"),
            TypeName::Bool => write!(f, "bool"),
            TypeName::Void => write!(f, "void"),
            TypeName::Exception => write!(f, "Exception"),
            TypeName::Class(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Lt,
    Gt,
    Eq,
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Eq => "==",
        };
        write!(f, "{s}")
    }
}

/// Literal constants. String literals are only legal inside `println`
/// arguments; the parsers enforce that.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constant {
    Int(i64),
    Bool(bool),
    Str(String),
    Null,
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(n) => write!(f, "{n}"),
            Constant::Bool(b) => write!(f, "{b}"),
            Constant::Str(s) => write!(f, "{:?}", s),
            Constant::Null => write!(f, "null"),
        }
    }
}

/// Block label (`L0`, `L1`, ...). Labels are reserved identifiers matching
/// `L` followed by digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }

    /// The numeric part of the label, when it has the canonical `L<n>` form.
    pub fn number(&self) -> Option<u64> {
        self.0.strip_prefix('L').and_then(|d| d.parse().ok())
    }

    pub fn is_label_ident(s: &str) -> bool {
        s.len() > 1 && s.starts_with('L') && s[1..].bytes().all(|b| b.is_ascii_digit())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
