//! A small S-expression reader for the SMT-LIB surface syntax.

use crate::alphabet::{Sym, Word};
use std::fmt;
use thiserror::Error;

/// Line and column (both 1-based) of a token.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Symbol(String, Pos),
    Int(i64, Pos),
    Str(Word, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Symbol(_, p) | Sexp::Int(_, p) | Sexp::Str(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Sexp::Symbol(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v, _) => Some(v),
            _ => None,
        }
    }

    /// The head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|v| v.first()).and_then(Sexp::as_symbol)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Symbol(s, _) => write!(f, "{s}"),
            Sexp::Int(n, _) => write!(f, "{n}"),
            Sexp::Str(w, _) => write!(f, "\"{}\"", crate::alphabet::smt_escape(w)),
            Sexp::List(v, _) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{pos}: {msg}")]
pub struct SexpError {
    pub pos: Pos,
    pub msg: String,
}

struct Reader<'a> {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Reader<'a> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err<T>(&self, pos: Pos, msg: impl Into<String>) -> Result<T, SexpError> {
        Err(SexpError {
            pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, SexpError> {
        self.skip_ws();
        let pos = self.pos();
        match self.peek() {
            None => self.err(pos, "unexpected end of input"),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return self.err(pos, "unclosed parenthesis"),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, pos));
                        }
                        _ => items.push(self.read()?),
                    }
                }
            }
            Some(')') => self.err(pos, "unexpected ')'"),
            Some('"') => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => return self.err(pos, "unterminated string literal"),
                        Some('"') => {
                            if self.peek() == Some('"') {
                                self.bump();
                                text.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => text.push(c),
                    }
                }
                let w = unescape(&text).map_err(|msg| SexpError { pos, msg })?;
                Ok(Sexp::Str(w, pos))
            }
            Some('|') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return self.err(pos, "unterminated quoted symbol"),
                        Some('|') => break,
                        Some(c) => s.push(c),
                    }
                }
                Ok(Sexp::Symbol(s, pos))
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                if !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()) {
                    match s.parse::<i64>() {
                        Ok(n) => Ok(Sexp::Int(n, pos)),
                        Err(_) => self.err(pos, format!("numeral out of range: {s}")),
                    }
                } else {
                    Ok(Sexp::Symbol(s, pos))
                }
            }
        }
    }
}

/// Decodes SMT-LIB 2.6 unicode escapes (`\u{h..}`, `\udddd`). Other
/// backslashes are literal.
fn unescape(text: &str) -> Result<Word, String> {
    let cs: Vec<char> = text.chars().collect();
    let mut out: Vec<Sym> = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        if cs[i] == '\\' && i + 1 < cs.len() && cs[i + 1] == 'u' {
            if i + 2 < cs.len() && cs[i + 2] == '{' {
                if let Some(end) = cs[i + 3..].iter().position(|&c| c == '}') {
                    let hex: String = cs[i + 3..i + 3 + end].iter().collect();
                    if !hex.is_empty() && hex.len() <= 5 {
                        if let Ok(v) = u32::from_str_radix(&hex, 16) {
                            if v > crate::alphabet::MAX_CHAR {
                                return Err(format!("escape \\u{{{hex}}} out of range"));
                            }
                            out.push(v);
                            i += 4 + end;
                            continue;
                        }
                    }
                }
            } else if i + 6 <= cs.len() {
                let hex: String = cs[i + 2..i + 6].iter().collect();
                if hex.chars().all(|c| c.is_ascii_hexdigit()) {
                    out.push(u32::from_str_radix(&hex, 16).unwrap());
                    i += 6;
                    continue;
                }
            }
        }
        out.push(cs[i] as Sym);
        i += 1;
    }
    Ok(out)
}

/// Parses every top-level S-expression in `src`.
pub fn parse_all(src: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut r = Reader {
        chars: src.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
        _src: src,
    };
    let mut out = Vec::new();
    loop {
        r.skip_ws();
        if r.peek().is_none() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}

/// Parses exactly one S-expression.
pub fn parse_one(src: &str) -> Result<Sexp, SexpError> {
    let mut all = parse_all(src)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(SexpError {
            pos: Pos { line: 1, col: 1 },
            msg: "empty input".into(),
        }),
        _ => Err(SexpError {
            pos: all[1].pos(),
            msg: "trailing input after expression".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::word;

    #[test]
    fn reads_nested_lists() {
        let e = parse_one("(assert (= x \"a\"\"b\")) ; c").unwrap();
        assert_eq!(e.head(), Some("assert"));
        let inner = &e.as_list().unwrap()[1];
        assert_eq!(inner.as_list().unwrap()[2], Sexp::Str(word("a\"b"), inner.as_list().unwrap()[2].pos()));
        assert_eq!(e.to_string(), "(assert (= x \"a\"\"b\"))");
    }

    #[test]
    fn unicode_escapes() {
        assert_eq!(unescape("\\u{41}\\u0042c").unwrap(), word("ABc"));
        assert_eq!(unescape("\\n").unwrap(), word("\\n"));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_all("(a\n  (b").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 3 });
        assert!(parse_all(")").is_err());
    }
}
