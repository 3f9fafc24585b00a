//! Token stream shared by the `.ssafj` and `.fjl` parsers.

use crate::common::SrcPos;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Dot,
    Arrow,    // ->
    FatArrow, // =>
    Assign,   // =
    EqEq,     // ==
    Lt,
    Gt,
    Plus,
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(_) => write!(f, "string literal"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::FatArrow => write!(f, "`=>`"),
            Tok::Assign => write!(f, "`=`"),
            Tok::EqEq => write!(f, "`==`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: Tok,
    pub pos: SrcPos,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: SrcPos,
    pub msg: String,
}

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut toks = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($kind:expr, $len:expr) => {{
            toks.push(Token {
                kind: $kind,
                pos: SrcPos::new(line, col),
            });
            i += $len;
            col += $len as u32;
        }};
    }

    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            ';' => push!(Tok::Semi, 1),
            ':' => push!(Tok::Colon, 1),
            ',' => push!(Tok::Comma, 1),
            '.' => push!(Tok::Dot, 1),
            '+' => push!(Tok::Plus, 1),
            '<' => push!(Tok::Lt, 1),
            '>' => push!(Tok::Gt, 1),
            '-' if bytes.get(i + 1) == Some(&b'>') => push!(Tok::Arrow, 2),
            '-' => push!(Tok::Minus, 1),
            '=' if bytes.get(i + 1) == Some(&b'>') => push!(Tok::FatArrow, 2),
            '=' if bytes.get(i + 1) == Some(&b'=') => push!(Tok::EqEq, 2),
            '=' => push!(Tok::Assign, 1),
            '"' => {
                let start = SrcPos::new(line, col);
                let mut s = String::new();
                let mut j = i + 1;
                let mut ok = false;
                while j < bytes.len() {
                    match bytes[j] {
                        b'"' => {
                            ok = true;
                            break;
                        }
                        b'\\' => {
                            let esc = bytes.get(j + 1).copied().ok_or_else(|| LexError {
                                pos: start,
                                msg: "unterminated string literal".into(),
                            })?;
                            match esc {
                                b'"' => s.push('"'),
                                b'\\' => s.push('\\'),
                                b'n' => s.push('\n'),
                                other => {
                                    return Err(LexError {
                                        pos: start,
                                        msg: format!("unknown escape `\\{}`", other as char),
                                    })
                                }
                            }
                            j += 2;
                        }
                        b'\n' => break,
                        b => {
                            s.push(b as char);
                            j += 1;
                        }
                    }
                }
                if !ok {
                    return Err(LexError {
                        pos: start,
                        msg: "unterminated string literal".into(),
                    });
                }
                let len = j + 1 - i;
                toks.push(Token {
                    kind: Tok::Str(s),
                    pos: start,
                });
                i += len;
                col += len as u32;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let n: i64 = text.parse().map_err(|_| LexError {
                    pos: SrcPos::new(line, col),
                    msg: format!("integer literal `{text}` out of range"),
                })?;
                toks.push(Token {
                    kind: Tok::Int(n),
                    pos: SrcPos::new(line, col),
                });
                col += (i - start) as u32;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push(Token {
                    kind: Tok::Ident(src[start..i].to_string()),
                    pos: SrcPos::new(line, col),
                });
                col += (i - start) as u32;
            }
            other => {
                return Err(LexError {
                    pos: SrcPos::new(line, col),
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(toks)
}

/// Cursor over a token stream with backtracking, shared by both parsers.
pub struct Cursor {
    toks: Vec<Token>,
    pub i: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, i: 0 }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.kind)
    }

    pub fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.toks.get(self.i + off).map(|t| &t.kind)
    }

    pub fn pos(&self) -> SrcPos {
        self.toks
            .get(self.i)
            .or_else(|| self.toks.last())
            .map(|t| t.pos)
            .unwrap_or_default()
    }

    pub fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.kind.clone());
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    pub fn at(&self, kind: &Tok) -> bool {
        self.peek() == Some(kind)
    }

    pub fn eat(&mut self, kind: &Tok) -> bool {
        if self.at(kind) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    pub fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word)
    }

    pub fn eat_ident(&mut self, word: &str) -> bool {
        if self.at_ident(word) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    pub fn at_eof(&self) -> bool {
        self.i >= self.toks.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_arrows_and_operators() {
        let toks = lex("a -> b => c == d = e - 1").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::FatArrow,
                Tok::Ident("c".into()),
                Tok::EqEq,
                Tok::Ident("d".into()),
                Tok::Assign,
                Tok::Ident("e".into()),
                Tok::Minus,
                Tok::Int(1),
            ]
        );
    }

    #[test]
    fn tracks_lines_and_skips_comments() {
        let toks = lex("x\n// comment\n  y").unwrap();
        assert_eq!(toks[0].pos.line, 1);
        assert_eq!(toks[1].pos.line, 3);
        assert_eq!(toks[1].pos.col, 3);
    }

    #[test]
    fn string_literals_with_escapes() {
        let toks = lex(r#""a\"b""#).unwrap();
        assert_eq!(toks[0].kind, Tok::Str("a\"b".into()));
        assert!(lex("\"unterminated").is_err());
    }
}
