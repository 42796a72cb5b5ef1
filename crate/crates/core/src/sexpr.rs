//! Minimal s-expression reader shared by the formula, structure and forest
//! file formats.

use std::fmt;

use thiserror::Error;

/// Line/column position (both 1-based) of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// An error while reading or interpreting an s-expression file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Symbol(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }

    /// The list's items, or an error naming what was expected.
    pub fn expect_list(&self, what: &str) -> Result<&[SExpr], ParseError> {
        self.as_list()
            .ok_or_else(|| ParseError::new(self.pos(), format!("expected {what}")))
    }

    pub fn expect_symbol(&self, what: &str) -> Result<&str, ParseError> {
        self.as_symbol()
            .ok_or_else(|| ParseError::new(self.pos(), format!("expected {what}")))
    }

    /// Parses a symbol as a non-negative integer.
    pub fn expect_usize(&self, what: &str) -> Result<usize, ParseError> {
        let s = self.expect_symbol(what)?;
        s.parse::<usize>()
            .map_err(|_| ParseError::new(self.pos(), format!("expected {what}, found `{s}`")))
    }

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(SExpr::as_symbol)
    }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')' || c == ';'
}

/// Reads every top-level s-expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), pos));
            }
            ')' => {
                chars.next();
                col += 1;
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| ParseError::new(pos, "unbalanced `)`"))?;
                let list = SExpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => {
                let mut sym = String::new();
                while let Some(&c) = chars.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    if !c.is_ascii() {
                        return Err(ParseError::new(
                            Pos { line, col },
                            format!("non-ASCII character `{c}`"),
                        ));
                    }
                    sym.push(c);
                    chars.next();
                    col += 1;
                }
                let atom = SExpr::Symbol(sym, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }
    if let Some((_, open)) = stack.pop() {
        return Err(ParseError::new(open, "unclosed `(`"));
    }
    Ok(top)
}
