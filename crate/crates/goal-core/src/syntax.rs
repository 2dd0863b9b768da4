//! Shared lexer and error type for formulas, mental-state formulas and agent files.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("unknown atom `{name}` at {pos}")]
    UnknownAtom { name: String, pos: Pos },
    #[error("undeclared capability `{name}` at {pos}")]
    UnknownCapability { name: String, pos: Pos },
}

impl ParseError {
    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax { pos, msg: msg.into() }
    }

    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownAtom { pos, .. }
            | ParseError::UnknownCapability { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(u64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    At,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "`{n}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::At => f.write_str("`@`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::DArrow => f.write_str("`<->`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

/// Tokenize `src`. `#` starts a comment running to end of line.
pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut adv = 1;
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => out.push((Tok::LParen, pos)),
            ')' => out.push((Tok::RParen, pos)),
            '{' => out.push((Tok::LBrace, pos)),
            '}' => out.push((Tok::RBrace, pos)),
            ';' => out.push((Tok::Semi, pos)),
            ',' => out.push((Tok::Comma, pos)),
            '@' => out.push((Tok::At, pos)),
            '=' => out.push((Tok::Eq, pos)),
            '!' => out.push((Tok::Bang, pos)),
            '&' => out.push((Tok::Amp, pos)),
            '|' => out.push((Tok::Pipe, pos)),
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                adv = 2;
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                out.push((Tok::DArrow, pos));
                adv = 3;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i + adv < chars.len()
                    && (chars[i + adv].is_ascii_alphanumeric() || chars[i + adv] == '_')
                {
                    adv += 1;
                }
                out.push((Tok::Ident(chars[start..start + adv].iter().collect()), pos));
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i + adv < chars.len() && chars[i + adv].is_ascii_digit() {
                    adv += 1;
                }
                let text: String = chars[start..start + adv].iter().collect();
                let n = text
                    .parse()
                    .map_err(|_| ParseError::syntax(pos, format!("number `{text}` out of range")))?;
                out.push((Tok::Number(n), pos));
            }
            other => return Err(ParseError::syntax(pos, format!("unexpected character `{other}`"))),
        }
        i += adv;
        col += adv;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Cursor over a token vector.
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: lex(src)?, at: 0 })
    }

    /// A cursor over already-lexed tokens; `end` positions the trailing Eof.
    pub fn from_tokens(mut toks: Vec<(Tok, Pos)>, end: Pos) -> Self {
        toks.push((Tok::Eof, end));
        Cursor { toks, at: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub fn peek2(&self) -> &Tok {
        let j = (self.at + 1).min(self.toks.len() - 1);
        &self.toks[j].0
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<Pos, ParseError> {
        let pos = self.pos();
        if self.eat(t) {
            Ok(pos)
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<Pos, ParseError> {
        if self.is_kw(kw) {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().1;
                Ok((s, pos))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::syntax(self.pos(), format!("expected {wanted}, found {}", self.peek()))
    }
}
