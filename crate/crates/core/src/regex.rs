//! Regular expressions: abstract syntax, two concrete dialects, and a printer.
//!
//! Character ranges live in the user alphabet (`0..=MAX_CHAR`); the separator
//! never occurs in a regex. Complement is taken with respect to the user
//! alphabet.

use crate::alphabet::{Sym, MAX_CHAR};
use crate::sexpr::{self, Pos, Sexp};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regex {
    Empty,
    Epsilon,
    Range(Sym, Sym),
    Union(Box<Regex>, Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
    Complement(Box<Regex>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    Classic,
    SmtLib,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegexError {
    #[error("regex syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("{pos}: {msg}")]
    SmtSyntax { pos: Pos, msg: String },
    #[error("empty character range {lo:#x}-{hi:#x}")]
    BadRange { lo: Sym, hi: Sym },
}

impl Regex {
    pub fn chr(c: char) -> Regex {
        Regex::Range(c as Sym, c as Sym)
    }

    pub fn range(lo: Sym, hi: Sym) -> Result<Regex, RegexError> {
        if lo > hi || hi > MAX_CHAR {
            Err(RegexError::BadRange { lo, hi })
        } else {
            Ok(Regex::Range(lo, hi))
        }
    }

    pub fn any_char() -> Regex {
        Regex::Range(0, MAX_CHAR)
    }

    pub fn all() -> Regex {
        Regex::Star(Box::new(Regex::any_char()))
    }

    pub fn union(a: Regex, b: Regex) -> Regex {
        Regex::Union(Box::new(a), Box::new(b))
    }

    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn star(a: Regex) -> Regex {
        Regex::Star(Box::new(a))
    }

    pub fn complement(a: Regex) -> Regex {
        Regex::Complement(Box::new(a))
    }

    pub fn plus(a: Regex) -> Regex {
        Regex::concat(a.clone(), Regex::star(a))
    }

    pub fn opt(a: Regex) -> Regex {
        Regex::union(a, Regex::Epsilon)
    }

    /// Intersection, expressed through complement and union.
    pub fn inter(a: Regex, b: Regex) -> Regex {
        Regex::complement(Regex::union(Regex::complement(a), Regex::complement(b)))
    }

    /// The regex matching exactly `w`.
    pub fn literal(w: &[Sym]) -> Regex {
        Regex::concat_all(w.iter().map(|&c| Regex::Range(c, c)).collect())
    }

    /// Right-nested concatenation; `Epsilon` when empty.
    pub fn concat_all(mut parts: Vec<Regex>) -> Regex {
        let Some(mut acc) = parts.pop() else {
            return Regex::Epsilon;
        };
        while let Some(p) = parts.pop() {
            acc = Regex::concat(p, acc);
        }
        acc
    }

    /// Right-nested union; `Empty` when empty.
    pub fn union_all(mut parts: Vec<Regex>) -> Regex {
        let Some(mut acc) = parts.pop() else {
            return Regex::Empty;
        };
        while let Some(p) = parts.pop() {
            acc = Regex::union(p, acc);
        }
        acc
    }

    /// `a{lo,hi}`; `hi = None` means unbounded.
    pub fn repeat(a: Regex, lo: u32, hi: Option<u32>) -> Regex {
        let mut parts: Vec<Regex> = (0..lo).map(|_| a.clone()).collect();
        match hi {
            None => parts.push(Regex::star(a)),
            Some(h) => {
                for _ in lo..h {
                    parts.push(Regex::opt(a.clone()));
                }
            }
        }
        Regex::concat_all(parts)
    }

    /// A union of ranges (sorted and merged first).
    pub fn class(ranges: &[(Sym, Sym)]) -> Regex {
        let merged = merge_ranges(ranges);
        Regex::union_all(merged.into_iter().map(|(l, h)| Regex::Range(l, h)).collect())
    }

    pub fn nullable(&self) -> bool {
        match self {
            Regex::Empty | Regex::Range(..) => false,
            Regex::Epsilon | Regex::Star(_) => true,
            Regex::Union(a, b) => a.nullable() || b.nullable(),
            Regex::Concat(a, b) => a.nullable() && b.nullable(),
            Regex::Complement(a) => !a.nullable(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Regex::Empty | Regex::Epsilon | Regex::Range(..) => 0,
            Regex::Union(a, b) | Regex::Concat(a, b) => 1 + a.depth().max(b.depth()),
            Regex::Star(a) | Regex::Complement(a) => 1 + a.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Regex::Empty | Regex::Epsilon | Regex::Range(..) => 1,
            Regex::Union(a, b) | Regex::Concat(a, b) => 1 + a.size() + b.size(),
            Regex::Star(a) | Regex::Complement(a) => 1 + a.size(),
        }
    }

    /// Renders the regex as an SMT-LIB `re.*` term.
    pub fn to_smtlib(&self) -> String {
        match self {
            Regex::Empty => "re.none".into(),
            Regex::Epsilon => "(str.to_re \"\")".into(),
            Regex::Range(l, h) if l == h => {
                format!("(str.to_re \"{}\")", crate::alphabet::smt_escape(&[*l]))
            }
            Regex::Range(0, MAX_CHAR) => "re.allchar".into(),
            Regex::Range(l, h) => format!(
                "(re.range \"{}\" \"{}\")",
                crate::alphabet::smt_escape(&[*l]),
                crate::alphabet::smt_escape(&[*h])
            ),
            Regex::Union(a, b) => format!("(re.union {} {})", a.to_smtlib(), b.to_smtlib()),
            Regex::Concat(a, b) => format!("(re.++ {} {})", a.to_smtlib(), b.to_smtlib()),
            Regex::Star(a) => format!("(re.* {})", a.to_smtlib()),
            Regex::Complement(a) => format!("(re.comp {})", a.to_smtlib()),
        }
    }
}

/// Sorts and merges overlapping or adjacent ranges.
pub fn merge_ranges(ranges: &[(Sym, Sym)]) -> Vec<(Sym, Sym)> {
    let mut v: Vec<(Sym, Sym)> = ranges.iter().copied().filter(|(l, h)| l <= h).collect();
    v.sort();
    let mut out: Vec<(Sym, Sym)> = Vec::new();
    for (l, h) in v {
        if let Some(last) = out.last_mut() {
            if l <= last.1.saturating_add(1) {
                last.1 = last.1.max(h);
                continue;
            }
        }
        out.push((l, h));
    }
    out
}

/// Complement of a set of ranges within `0..=max`.
pub fn complement_ranges(ranges: &[(Sym, Sym)], max: Sym) -> Vec<(Sym, Sym)> {
    let mut out = Vec::new();
    let mut next = 0u32;
    for (l, h) in merge_ranges(ranges) {
        if l > next {
            out.push((next, l - 1));
        }
        next = h.saturating_add(1);
        if h >= max {
            return out;
        }
    }
    if next <= max {
        out.push((next, max));
    }
    out
}

// ---------------------------------------------------------------------------
// Classic dialect

const SPECIAL: &str = "()[]|*+?{}.\\~";

struct Classic<'a> {
    cs: Vec<char>,
    i: usize,
    _src: &'a str,
}

impl Classic<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, RegexError> {
        Err(RegexError::Syntax {
            offset: self.i,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.cs.get(self.i).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn alt(&mut self) -> Result<Regex, RegexError> {
        let mut parts = vec![self.seq()?];
        while self.eat('|') {
            parts.push(self.seq()?);
        }
        Ok(Regex::union_all(parts))
    }

    fn seq(&mut self) -> Result<Regex, RegexError> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            parts.push(self.postfix()?);
        }
        Ok(Regex::concat_all(parts))
    }

    fn postfix(&mut self) -> Result<Regex, RegexError> {
        let mut e = self.prefix()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.i += 1;
                    e = Regex::star(e);
                }
                Some('+') => {
                    self.i += 1;
                    e = Regex::plus(e);
                }
                Some('?') => {
                    self.i += 1;
                    e = Regex::opt(e);
                }
                Some('{') => {
                    self.i += 1;
                    let lo = self.number()?;
                    let hi = if self.eat(',') {
                        if self.peek() == Some('}') {
                            None
                        } else {
                            Some(self.number()?)
                        }
                    } else {
                        Some(lo)
                    };
                    if !self.eat('}') {
                        return self.err("expected '}'");
                    }
                    if let Some(h) = hi {
                        if h < lo {
                            return self.err("repetition bounds out of order");
                        }
                    }
                    e = Regex::repeat(e, lo, hi);
                }
                _ => return Ok(e),
            }
        }
    }

    fn number(&mut self) -> Result<u32, RegexError> {
        let start = self.i;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.i += 1;
        }
        let s: String = self.cs[start..self.i].iter().collect();
        match s.parse::<u32>() {
            Ok(n) if n <= 1000 => Ok(n),
            _ => self.err("expected a repetition count"),
        }
    }

    fn prefix(&mut self) -> Result<Regex, RegexError> {
        if self.eat('~') {
            return Ok(Regex::complement(self.prefix()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Regex, RegexError> {
        match self.peek() {
            None => self.err("unexpected end of pattern"),
            Some('(') => {
                self.i += 1;
                let e = self.alt()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some('[') => {
                self.i += 1;
                self.class()
            }
            Some('.') => {
                self.i += 1;
                Ok(Regex::any_char())
            }
            Some('\\') => {
                self.i += 1;
                let ranges = self.escape()?;
                Ok(Regex::class(&ranges))
            }
            Some(c) if SPECIAL.contains(c) => self.err(format!("unexpected '{c}'")),
            Some(c) => {
                self.i += 1;
                Ok(Regex::chr(c))
            }
        }
    }

    /// Parses the escape after a backslash; returns the ranges it denotes.
    fn escape(&mut self) -> Result<Vec<(Sym, Sym)>, RegexError> {
        let Some(c) = self.peek() else {
            return self.err("dangling backslash");
        };
        self.i += 1;
        Ok(match c {
            'd' => vec![('0' as Sym, '9' as Sym)],
            'w' => vec![
                ('0' as Sym, '9' as Sym),
                ('A' as Sym, 'Z' as Sym),
                ('_' as Sym, '_' as Sym),
                ('a' as Sym, 'z' as Sym),
            ],
            's' => vec![(9, 13), (32, 32)],
            'n' => vec![(10, 10)],
            't' => vec![(9, 9)],
            'r' => vec![(13, 13)],
            'u' => {
                if !self.eat('{') {
                    return self.err("expected '{' after \\u");
                }
                let start = self.i;
                while matches!(self.peek(), Some(c) if c.is_ascii_hexdigit()) {
                    self.i += 1;
                }
                let hex: String = self.cs[start..self.i].iter().collect();
                if !self.eat('}') {
                    return self.err("expected '}' in \\u escape");
                }
                match u32::from_str_radix(&hex, 16) {
                    Ok(v) if v <= MAX_CHAR => vec![(v, v)],
                    _ => return self.err("bad \\u escape"),
                }
            }
            c => vec![(c as Sym, c as Sym)],
        })
    }

    fn class(&mut self) -> Result<Regex, RegexError> {
        let negated = self.eat('^');
        let mut ranges: Vec<(Sym, Sym)> = Vec::new();
        loop {
            match self.peek() {
                None => return self.err("unterminated character class"),
                Some(']') => {
                    self.i += 1;
                    break;
                }
                _ => {}
            }
            let lo = self.class_item()?;
            if self.peek() == Some('-') && self.cs.get(self.i + 1) != Some(&']') {
                self.i += 1;
                let hi = self.class_item()?;
                let (Some(l), Some(h)) = (single(&lo), single(&hi)) else {
                    return self.err("class escapes cannot bound a range");
                };
                if l > h {
                    return Err(RegexError::BadRange { lo: l, hi: h });
                }
                ranges.push((l, h));
            } else {
                ranges.extend(lo);
            }
        }
        if negated {
            ranges = complement_ranges(&ranges, MAX_CHAR);
        }
        Ok(Regex::class(&ranges))
    }

    fn class_item(&mut self) -> Result<Vec<(Sym, Sym)>, RegexError> {
        match self.peek() {
            Some('\\') => {
                self.i += 1;
                self.escape()
            }
            Some(c) => {
                self.i += 1;
                Ok(vec![(c as Sym, c as Sym)])
            }
            None => self.err("unterminated character class"),
        }
    }
}

fn single(r: &[(Sym, Sym)]) -> Option<Sym> {
    match r {
        [(l, h)] if l == h => Some(*l),
        _ => None,
    }
}

/// Parses a regex in the given dialect. SMT-LIB input may not reference
/// macros; see [`from_sexp`] for that.
pub fn parse_regex(src: &str, dialect: Dialect) -> Result<Regex, RegexError> {
    match dialect {
        Dialect::Classic => {
            let mut p = Classic {
                cs: src.chars().collect(),
                i: 0,
                _src: src,
            };
            let e = p.alt()?;
            if p.i != p.cs.len() {
                return p.err("unexpected ')'");
            }
            Ok(e)
        }
        Dialect::SmtLib => {
            let sx = sexpr::parse_one(src).map_err(|e| RegexError::SmtSyntax {
                pos: e.pos,
                msg: e.msg,
            })?;
            from_sexp(&sx, &|_| None)
        }
    }
}

fn smt_err<T>(s: &Sexp, msg: impl Into<String>) -> Result<T, RegexError> {
    Err(RegexError::SmtSyntax {
        pos: s.pos(),
        msg: msg.into(),
    })
}

fn single_char(s: &Sexp) -> Result<Sym, RegexError> {
    match s {
        Sexp::Str(w, _) if w.len() == 1 => Ok(w[0]),
        _ => smt_err(s, "re.range expects single-character string literals"),
    }
}

fn index(s: &Sexp) -> Result<u32, RegexError> {
    match s {
        Sexp::Int(n, _) if (0..=1000).contains(n) => Ok(*n as u32),
        _ => smt_err(s, "expected a small non-negative numeral"),
    }
}

/// Converts an SMT-LIB regex term. `lookup` resolves symbols bound by
/// `define-fun` (or similar) to regexes.
pub fn from_sexp(s: &Sexp, lookup: &dyn Fn(&str) -> Option<Regex>) -> Result<Regex, RegexError> {
    match s {
        Sexp::Symbol(name, _) => match name.as_str() {
            "re.none" | "re.nostr" => Ok(Regex::Empty),
            "re.all" => Ok(Regex::all()),
            "re.allchar" => Ok(Regex::any_char()),
            other => match lookup(other) {
                Some(r) => Ok(r),
                None => smt_err(s, format!("unknown regex '{other}'")),
            },
        },
        Sexp::List(items, _) => {
            let Some(head) = items.first() else {
                return smt_err(s, "empty regex term");
            };
            let args = &items[1..];
            if let Some(idx) = head.as_list() {
                // indexed operators: ((_ re.loop i j) e), ((_ re.^ n) e)
                if idx.first().and_then(Sexp::as_symbol) != Some("_") || args.len() != 1 {
                    return smt_err(s, "malformed indexed regex operator");
                }
                let inner = from_sexp(&args[0], lookup)?;
                return match (idx.get(1).and_then(Sexp::as_symbol), idx.len()) {
                    (Some("re.loop"), 4) => {
                        let lo = index(&idx[2])?;
                        let hi = index(&idx[3])?;
                        if hi < lo {
                            Ok(Regex::Empty)
                        } else {
                            Ok(Regex::repeat(inner, lo, Some(hi)))
                        }
                    }
                    (Some("re.^"), 3) => {
                        let n = index(&idx[2])?;
                        Ok(Regex::repeat(inner, n, Some(n)))
                    }
                    _ => smt_err(s, "unknown indexed regex operator"),
                };
            }
            let op = head.as_symbol().unwrap_or("");
            let sub = |i: usize| from_sexp(&args[i], lookup);
            let all = || -> Result<Vec<Regex>, RegexError> {
                args.iter().map(|a| from_sexp(a, lookup)).collect()
            };
            let arity = |n: usize| -> Result<(), RegexError> {
                if args.len() == n {
                    Ok(())
                } else {
                    smt_err(s, format!("{op} expects {n} argument(s)"))
                }
            };
            match op {
                "str.to_re" | "str.to.re" => {
                    arity(1)?;
                    match &args[0] {
                        Sexp::Str(w, _) => Ok(Regex::literal(w)),
                        other => smt_err(other, "str.to_re expects a string literal"),
                    }
                }
                "re.range" => {
                    arity(2)?;
                    let lo = single_char(&args[0])?;
                    let hi = single_char(&args[1])?;
                    Regex::range(lo, hi)
                }
                "re.++" => Ok(Regex::concat_all(all()?)),
                "re.union" => Ok(Regex::union_all(all()?)),
                "re.inter" => {
                    let mut v = all()?;
                    let Some(mut acc) = v.pop() else {
                        return Ok(Regex::all());
                    };
                    while let Some(x) = v.pop() {
                        acc = Regex::inter(x, acc);
                    }
                    Ok(acc)
                }
                "re.*" => {
                    arity(1)?;
                    Ok(Regex::star(sub(0)?))
                }
                "re.+" => {
                    arity(1)?;
                    Ok(Regex::plus(sub(0)?))
                }
                "re.opt" => {
                    arity(1)?;
                    Ok(Regex::opt(sub(0)?))
                }
                "re.comp" => {
                    arity(1)?;
                    Ok(Regex::complement(sub(0)?))
                }
                "re.diff" => {
                    arity(2)?;
                    Ok(Regex::inter(sub(0)?, Regex::complement(sub(1)?)))
                }
                _ => smt_err(s, format!("unknown regex operator '{op}'")),
            }
        }
        _ => smt_err(s, "expected a regex term"),
    }
}

// ---------------------------------------------------------------------------
// Printer (classic dialect)

fn prec(e: &Regex) -> u8 {
    match e {
        Regex::Union(..) => 0,
        Regex::Concat(..) => 1,
        Regex::Star(_) | Regex::Complement(_) => 2,
        _ => 3,
    }
}

fn class_char(c: Sym) -> String {
    match char::from_u32(c) {
        Some(ch) if "]\\^-[".contains(ch) => format!("\\{ch}"),
        Some(ch) if ch.is_ascii_graphic() || ch == ' ' => ch.to_string(),
        _ => format!("\\u{{{c:x}}}"),
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, e: &Regex, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regex::Empty => write!(f, "[]"),
            Regex::Epsilon => write!(f, "()"),
            Regex::Range(l, h) if l == h => match char::from_u32(*l) {
                Some(ch) if SPECIAL.contains(ch) || ch == '-' || ch == '^' => write!(f, "\\{ch}"),
                Some(ch) if ch.is_ascii_graphic() || ch == ' ' => write!(f, "{ch}"),
                _ => write!(f, "\\u{{{l:x}}}"),
            },
            Regex::Range(0, MAX_CHAR) => write!(f, "."),
            Regex::Range(l, h) => write!(f, "[{}-{}]", class_char(*l), class_char(*h)),
            Regex::Union(a, b) => {
                write_atom(f, a, 1)?;
                write!(f, "|")?;
                write_atom(f, b, 0)
            }
            Regex::Concat(a, b) => {
                write_atom(f, a, 2)?;
                // an Epsilon on the right prints as "()" which is fine; a
                // concat on the right nests naturally
                write_atom(f, b, 1)
            }
            Regex::Star(a) => {
                write_atom(f, a, 2)?;
                write!(f, "*")
            }
            Regex::Complement(a) => {
                write!(f, "~")?;
                match **a {
                    Regex::Complement(_) => write!(f, "{a}"),
                    _ => write_atom(f, a, 3),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(c: char) -> Regex {
        Regex::chr(c)
    }

    #[test]
    fn spec_shapes() {
        assert_eq!(parse_regex("a", Dialect::Classic).unwrap(), r('a'));
        assert_eq!(
            parse_regex("(ab)*", Dialect::Classic).unwrap(),
            Regex::star(Regex::concat(r('a'), r('b')))
        );
        let d = Regex::Range('0' as u32, '9' as u32);
        assert_eq!(
            parse_regex("[0-9]+", Dialect::Classic).unwrap(),
            Regex::concat(d.clone(), Regex::star(d))
        );
    }

    #[test]
    fn classic_round_trip() {
        for src in [
            "a|b|c",
            "(a|b)|c",
            "(ab)c",
            "a(bc)",
            "~a*",
            "~(a*)",
            "~~a",
            "a**",
            "[a-z0-9._ /-]+x?",
            "()|[]",
            "\\.\\*\\-",
            "[^a]",
            ".*\\u{7f}",
            "a{2,3}",
            "(a|())*",
        ] {
            let e = parse_regex(src, Dialect::Classic).unwrap();
            let printed = e.to_string();
            let back = parse_regex(&printed, Dialect::Classic).unwrap();
            assert_eq!(e, back, "{src} printed as {printed}");
        }
    }

    #[test]
    fn smtlib_round_trip() {
        let src = r#"(re.++ (re.+ (re.range "0" "9")) (re.opt (re.++ (str.to_re ".") (re.* (re.range "0" "9")))))"#;
        let e = parse_regex(src, Dialect::SmtLib).unwrap();
        let back = parse_regex(&e.to_smtlib(), Dialect::SmtLib).unwrap();
        assert_eq!(e, back);
        let c = parse_regex("[0-9]+(\\.[0-9]*)?", Dialect::Classic).unwrap();
        assert_eq!(c, e);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_regex("[z-a]", Dialect::Classic),
            Err(RegexError::BadRange { .. })
        ));
        assert!(parse_regex("(a", Dialect::Classic).is_err());
        assert!(parse_regex("a)", Dialect::Classic).is_err());
        assert!(parse_regex("*", Dialect::Classic).is_err());
        assert!(matches!(
            parse_regex(r#"(re.range "z" "a")"#, Dialect::SmtLib),
            Err(RegexError::BadRange { .. })
        ));
        assert!(parse_regex("(re.foo re.all)", Dialect::SmtLib).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(merge_ranges(&[(5, 7), (1, 2), (3, 4)]), vec![(1, 7)]);
        assert_eq!(complement_ranges(&[(0, 3), (7, 9)], 10), vec![(4, 6), (10, 10)]);
        assert_eq!(complement_ranges(&[], 10), vec![(0, 10)]);
        assert_eq!(complement_ranges(&[(0, 10)], 10), vec![]);
    }
}
