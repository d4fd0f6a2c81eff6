//! SMT-LIB surface syntax for scripts.

use super::ast::{Atom, IntTerm, SeqStrScript, SeqTerm, Sort, StrTerm};
use super::FrontendError;
use crate::alphabet::{Word, MAX_CHAR};
use crate::lia::Rel;
use crate::regex::{self, Regex};
use crate::sexpr::{parse_all, Pos, Sexp};
use std::collections::BTreeMap;

type Res<T> = Result<T, FrontendError>;

fn syntax<T>(pos: Pos, msg: impl Into<String>) -> Res<T> {
    Err(FrontendError::Syntax {
        pos,
        msg: msg.into(),
    })
}

fn sort_err<T>(pos: Pos, op: &str, msg: impl Into<String>) -> Res<T> {
    Err(FrontendError::Sort {
        pos,
        op: op.to_string(),
        msg: msg.into(),
    })
}

#[derive(Default)]
struct Parser {
    script: SeqStrScript,
    sorts: BTreeMap<String, Sort>,
    regexes: BTreeMap<String, Regex>,
    /// 0-ary `define-fun` of sort Int or String, expanded at use.
    macros: BTreeMap<String, (Sort, Sexp)>,
}

fn parse_sort(s: &Sexp) -> Res<Option<Sort>> {
    match s {
        Sexp::Symbol(n, _) if n == "Int" => Ok(Some(Sort::Int)),
        Sexp::Symbol(n, _) if n == "String" => Ok(Some(Sort::Str)),
        Sexp::Symbol(n, _) if n == "RegLan" => Ok(None),
        Sexp::List(v, _)
            if v.len() == 2 && v[0].as_symbol() == Some("Seq") && v[1].as_symbol() == Some("String") =>
        {
            Ok(Some(Sort::Seq))
        }
        _ => syntax(s.pos(), format!("unsupported sort {s}")),
    }
}

fn valid_ident(name: &str) -> bool {
    !name.is_empty() && !name.contains('#') && !name.starts_with(|c: char| c.is_ascii_digit())
}

/// Replaces `let`-bound symbols by their definitions.
fn expand_lets(s: &Sexp, env: &[(String, Sexp)]) -> Res<Sexp> {
    match s {
        Sexp::Symbol(n, _) => Ok(env
            .iter()
            .rev()
            .find(|(m, _)| m == n)
            .map(|(_, t)| t.clone())
            .unwrap_or_else(|| s.clone())),
        Sexp::List(v, p) if s.head() == Some("let") => {
            if v.len() != 3 {
                return syntax(*p, "let expects bindings and a body");
            }
            let Some(binds) = v[1].as_list() else {
                return syntax(v[1].pos(), "malformed let bindings");
            };
            let mut inner = env.to_vec();
            let mut added = Vec::new();
            for b in binds {
                match b.as_list() {
                    Some([Sexp::Symbol(n, _), t]) => added.push((n.clone(), expand_lets(t, env)?)),
                    _ => return syntax(b.pos(), "malformed let binding"),
                }
            }
            inner.extend(added);
            expand_lets(&v[2], &inner)
        }
        Sexp::List(v, p) => Ok(Sexp::List(
            v.iter().map(|x| expand_lets(x, env)).collect::<Res<_>>()?,
            *p,
        )),
        _ => Ok(s.clone()),
    }
}

fn check_word(w: &Word, pos: Pos) -> Res<()> {
    if w.iter().any(|&c| c > MAX_CHAR) {
        return syntax(pos, "string literal outside the character range");
    }
    Ok(())
}

impl Parser {
    fn command(&mut self, c: &Sexp) -> Res<()> {
        let Some(items) = c.as_list() else {
            return syntax(c.pos(), "expected a command");
        };
        let Some(head) = c.head() else {
            return syntax(c.pos(), "expected a command");
        };
        match head {
            "set-logic" | "set-info" | "set-option" | "check-sat" | "get-model" | "exit" => Ok(()),
            "declare-fun" | "declare-const" => {
                let (name, sort) = match (head, items) {
                    ("declare-fun", [_, Sexp::Symbol(n, _), Sexp::List(args, _), s]) if args.is_empty() => (n, s),
                    ("declare-const", [_, Sexp::Symbol(n, _), s]) => (n, s),
                    _ => return syntax(c.pos(), format!("malformed {head}")),
                };
                self.declare(name, sort, c.pos())
            }
            "define-fun" => {
                let [_, Sexp::Symbol(name, _), Sexp::List(args, _), sort, body] = items else {
                    return syntax(c.pos(), "malformed define-fun");
                };
                if !args.is_empty() {
                    return syntax(c.pos(), "only 0-ary define-fun is supported");
                }
                if self.sorts.contains_key(name) || self.regexes.contains_key(name) || self.macros.contains_key(name) {
                    return syntax(c.pos(), format!("'{name}' is already defined"));
                }
                let body = expand_lets(body, &[])?;
                match parse_sort(sort)? {
                    None => {
                        let r = self.regex(&body)?;
                        self.regexes.insert(name.clone(), r);
                    }
                    Some(Sort::Seq) => return syntax(c.pos(), "sequence-valued define-fun is not supported"),
                    Some(s) => {
                        // type-check now
                        match s {
                            Sort::Int => {
                                self.int(&body)?;
                            }
                            _ => {
                                self.str(&body)?;
                            }
                        }
                        self.macros.insert(name.clone(), (s, body));
                    }
                }
                Ok(())
            }
            "assert" => {
                if items.len() != 2 {
                    return syntax(c.pos(), "assert expects one formula");
                }
                let f = expand_lets(&items[1], &[])?;
                self.formula(&f)
            }
            "push" | "pop" => syntax(c.pos(), "push/pop is not supported"),
            other => syntax(c.pos(), format!("unsupported command '{other}'")),
        }
    }

    fn declare(&mut self, name: &str, sort: &Sexp, pos: Pos) -> Res<()> {
        if !valid_ident(name) {
            return syntax(pos, format!("invalid identifier '{name}'"));
        }
        if self.sorts.contains_key(name) || self.regexes.contains_key(name) || self.macros.contains_key(name) {
            return syntax(pos, format!("'{name}' is declared twice"));
        }
        let Some(s) = parse_sort(sort)? else {
            return syntax(pos, "regex-sorted variables are not supported");
        };
        self.sorts.insert(name.to_string(), s);
        self.script.decls.push((name.to_string(), s));
        Ok(())
    }

    fn regex(&self, s: &Sexp) -> Res<Regex> {
        let lookup = |n: &str| self.regexes.get(n).cloned();
        Ok(regex::from_sexp(s, &lookup)?)
    }

    fn formula(&mut self, f: &Sexp) -> Res<()> {
        let pos = f.pos();
        if f.as_symbol() == Some("true") {
            return Ok(());
        }
        let Some(items) = f.as_list() else {
            return syntax(pos, format!("expected a formula, found {f}"));
        };
        let head = f.head().unwrap_or("");
        let args = &items[1..];
        match head {
            "and" => {
                for a in args {
                    self.formula(a)?;
                }
                Ok(())
            }
            "or" | "=>" | "ite" | "xor" => syntax(pos, format!("'{head}' is outside the disjunction-free fragment")),
            "not" => {
                let [g] = args else {
                    return syntax(pos, "not expects one argument");
                };
                match g.head() {
                    Some("str.in_re") => {
                        let atom = self.membership(g)?;
                        let Atom::InRe(x, e) = atom else { unreachable!() };
                        self.script.assertions.push(Atom::InRe(x, Regex::complement(e)));
                        Ok(())
                    }
                    Some("=") => {
                        let Some([_, a, b]) = g.as_list() else {
                            return syntax(g.pos(), "= expects two arguments");
                        };
                        if self.infer(a)? == Some(Sort::Int) || self.infer(b)? == Some(Sort::Int) {
                            let a = self.int(a)?;
                            let b = self.int(b)?;
                            self.script.assertions.push(Atom::IntCmp(a, Rel::Ne, b));
                            Ok(())
                        } else {
                            Err(FrontendError::Disequality { pos })
                        }
                    }
                    Some(op @ ("<" | "<=" | ">" | ">=")) => {
                        let Some([_, a, b]) = g.as_list() else {
                            return syntax(g.pos(), format!("{op} expects two arguments"));
                        };
                        let r = rel(op).negate();
                        let (a, b) = (self.int(a)?, self.int(b)?);
                        self.script.assertions.push(Atom::IntCmp(a, r, b));
                        Ok(())
                    }
                    _ => syntax(pos, "negation is only supported on memberships and integer atoms"),
                }
            }
            "distinct" => {
                let [a, b] = args else {
                    return syntax(pos, "distinct expects two arguments");
                };
                if self.infer(a)? == Some(Sort::Int) || self.infer(b)? == Some(Sort::Int) {
                    let (a, b) = (self.int(a)?, self.int(b)?);
                    self.script.assertions.push(Atom::IntCmp(a, Rel::Ne, b));
                    Ok(())
                } else {
                    Err(FrontendError::Disequality { pos })
                }
            }
            "str.in_re" => {
                let a = self.membership(f)?;
                self.script.assertions.push(a);
                Ok(())
            }
            "=" => {
                let [a, b] = args else {
                    return syntax(pos, "= expects two arguments");
                };
                let sa = self.infer(a)?;
                let sb = self.infer(b)?;
                let sort = match (sa, sb) {
                    (Some(x), Some(y)) if x != y => return sort_err(pos, "=", format!("{x} vs {y}")),
                    (Some(x), _) | (_, Some(x)) => x,
                    (None, None) => return sort_err(pos, "=", "cannot infer operand sorts"),
                };
                let atom = match sort {
                    Sort::Int => Atom::IntCmp(self.int(a)?, Rel::Eq, self.int(b)?),
                    Sort::Str => Atom::StrEq(self.str(a)?, self.str(b)?),
                    Sort::Seq => Atom::SeqEq(self.seq(a)?, self.seq(b)?),
                };
                self.script.assertions.push(atom);
                Ok(())
            }
            "<" | "<=" | ">" | ">=" => {
                let [a, b] = args else {
                    return syntax(pos, format!("{head} expects two arguments"));
                };
                let (a, b) = (self.int(a)?, self.int(b)?);
                self.script.assertions.push(Atom::IntCmp(a, rel(head), b));
                Ok(())
            }
            _ => syntax(pos, format!("unsupported formula head '{head}'")),
        }
    }

    fn membership(&self, f: &Sexp) -> Res<Atom> {
        let Some([_, x, e]) = f.as_list() else {
            return syntax(f.pos(), "str.in_re expects two arguments");
        };
        Ok(Atom::InRe(self.str(x)?, self.regex(e)?))
    }

    /// Sort of a term, when it can be determined locally.
    fn infer(&self, t: &Sexp) -> Res<Option<Sort>> {
        Ok(match t {
            Sexp::Int(..) => Some(Sort::Int),
            Sexp::Str(..) => Some(Sort::Str),
            Sexp::Symbol(n, p) => match self.sorts.get(n) {
                Some(s) => Some(*s),
                None => match self.macros.get(n) {
                    Some((s, _)) => Some(*s),
                    None if n == "seq.empty" => Some(Sort::Seq),
                    None => {
                        return Err(FrontendError::Undeclared {
                            pos: *p,
                            name: n.clone(),
                        })
                    }
                },
            },
            Sexp::List(..) => match t.head() {
                Some("+" | "-" | "*" | "str.len" | "seq.len") => Some(Sort::Int),
                Some("str.++" | "seq.nth" | "seq.join" | "seq.joinw") => Some(Sort::Str),
                Some(
                    "seq.++" | "seq.unit" | "seq.update" | "seq.filterre" | "seq.extract" | "str.splitre"
                    | "str.matchall" | "as",
                ) => Some(Sort::Seq),
                _ => None,
            },
        })
    }

    fn int(&self, t: &Sexp) -> Res<IntTerm> {
        let pos = t.pos();
        match t {
            Sexp::Int(n, _) => Ok(IntTerm::Const(*n)),
            Sexp::Symbol(n, _) => match (self.sorts.get(n), self.macros.get(n)) {
                (Some(Sort::Int), _) => Ok(IntTerm::Var(n.clone())),
                (None, Some((Sort::Int, body))) => self.int(body),
                (Some(s), _) => sort_err(pos, n, format!("expected Int, found {s}")),
                (None, Some((s, _))) => sort_err(pos, n, format!("expected Int, found {s}")),
                (None, None) => Err(FrontendError::Undeclared {
                    pos,
                    name: n.clone(),
                }),
            },
            Sexp::Str(..) => sort_err(pos, "literal", "expected Int, found String"),
            Sexp::List(items, _) => {
                let head = t.head().unwrap_or("");
                let args = &items[1..];
                match (head, args) {
                    ("+", [_, ..]) => {
                        let mut acc = self.int(&args[0])?;
                        for a in &args[1..] {
                            acc = IntTerm::add(acc, self.int(a)?);
                        }
                        Ok(acc)
                    }
                    ("-", [a]) => match self.int(a)? {
                        IntTerm::Const(n) => Ok(IntTerm::Const(-n)),
                        x => Ok(IntTerm::Mul(-1, Box::new(x))),
                    },
                    ("-", [_, _, ..]) => {
                        let mut acc = self.int(&args[0])?;
                        for a in &args[1..] {
                            acc = IntTerm::sub(acc, self.int(a)?);
                        }
                        Ok(acc)
                    }
                    ("*", [a, b]) => {
                        let (a, b) = (self.int(a)?, self.int(b)?);
                        match (a, b) {
                            (IntTerm::Const(k), x) | (x, IntTerm::Const(k)) => Ok(IntTerm::Mul(k, Box::new(x))),
                            _ => sort_err(pos, "*", "non-linear multiplication"),
                        }
                    }
                    ("str.len", [x]) => Ok(IntTerm::strlen(self.str(x)?)),
                    ("seq.len", [s]) => Ok(IntTerm::seqlen(self.seq(s)?)),
                    _ => match self.infer(t)? {
                        Some(s) if s != Sort::Int => sort_err(pos, head, format!("expected Int, found {s}")),
                        _ => syntax(pos, format!("unsupported integer term {t}")),
                    },
                }
            }
        }
    }

    fn str_lit(&self, t: &Sexp) -> Res<Word> {
        match t {
            Sexp::Str(w, p) => {
                check_word(w, *p)?;
                Ok(w.clone())
            }
            Sexp::Symbol(n, _) => match self.macros.get(n) {
                Some((Sort::Str, body)) => self.str_lit(body),
                _ => syntax(t.pos(), "expected a string literal"),
            },
            _ => syntax(t.pos(), "expected a string literal"),
        }
    }

    fn str(&self, t: &Sexp) -> Res<StrTerm> {
        let pos = t.pos();
        match t {
            Sexp::Str(w, _) => {
                check_word(w, pos)?;
                Ok(StrTerm::Lit(w.clone()))
            }
            Sexp::Int(..) => sort_err(pos, "literal", "expected String, found Int"),
            Sexp::Symbol(n, _) => match (self.sorts.get(n), self.macros.get(n)) {
                (Some(Sort::Str), _) => Ok(StrTerm::Var(n.clone())),
                (None, Some((Sort::Str, body))) => self.str(body),
                (Some(s), _) => sort_err(pos, n, format!("expected String, found {s}")),
                (None, Some((s, _))) => sort_err(pos, n, format!("expected String, found {s}")),
                (None, None) => Err(FrontendError::Undeclared {
                    pos,
                    name: n.clone(),
                }),
            },
            Sexp::List(items, _) => {
                let head = t.head().unwrap_or("");
                let args = &items[1..];
                match (head, args) {
                    ("str.++", [_, ..]) => {
                        let mut acc = self.str(&args[0])?;
                        for a in &args[1..] {
                            acc = StrTerm::concat(acc, self.str(a)?);
                        }
                        Ok(acc)
                    }
                    ("str.++", []) => Ok(StrTerm::Lit(Vec::new())),
                    ("seq.nth", [s, i]) => Ok(StrTerm::nth(self.seq(s)?, self.int(i)?)),
                    ("seq.join", [s]) => Ok(StrTerm::Join(Box::new(self.seq(s)?), Vec::new())),
                    ("seq.join" | "seq.joinw", [s, u]) => Ok(StrTerm::Join(Box::new(self.seq(s)?), self.str_lit(u)?)),
                    _ => match self.infer(t)? {
                        Some(s) if s != Sort::Str => sort_err(pos, head, format!("expected String, found {s}")),
                        _ => syntax(pos, format!("unsupported string term {t}")),
                    },
                }
            }
        }
    }

    fn seq(&self, t: &Sexp) -> Res<SeqTerm> {
        let pos = t.pos();
        match t {
            Sexp::Symbol(n, _) if n == "seq.empty" && !self.sorts.contains_key(n) => Ok(SeqTerm::Lit(Vec::new())),
            Sexp::Symbol(n, _) => match self.sorts.get(n) {
                Some(Sort::Seq) => Ok(SeqTerm::Var(n.clone())),
                Some(s) => sort_err(pos, n, format!("expected (Seq String), found {s}")),
                None if self.macros.contains_key(n) => sort_err(pos, n, "expected (Seq String)"),
                None => Err(FrontendError::Undeclared {
                    pos,
                    name: n.clone(),
                }),
            },
            Sexp::Int(..) | Sexp::Str(..) => sort_err(pos, "literal", "expected (Seq String)"),
            Sexp::List(items, _) => {
                let head = t.head().unwrap_or("");
                let args = &items[1..];
                match (head, args) {
                    ("as", [Sexp::Symbol(e, _), s]) if e == "seq.empty" => match parse_sort(s)? {
                        Some(Sort::Seq) => Ok(SeqTerm::Lit(Vec::new())),
                        _ => sort_err(pos, "as", "seq.empty must have sort (Seq String)"),
                    },
                    ("seq.unit", [x]) => Ok(SeqTerm::unit(self.str(x)?)),
                    ("seq.++", [_, ..]) => {
                        let mut acc = self.seq(&args[0])?;
                        for a in &args[1..] {
                            acc = SeqTerm::concat(acc, self.seq(a)?);
                        }
                        Ok(acc)
                    }
                    ("seq.update", [s, i, u]) => Ok(SeqTerm::write(self.seq(s)?, self.int(i)?, self.str(u)?)),
                    ("seq.filterre", [s, e]) => Ok(SeqTerm::filter(self.regex(e)?, self.seq(s)?)),
                    ("seq.extract", [s, i, j]) => Ok(SeqTerm::subseq(self.seq(s)?, self.int(i)?, self.int(j)?)),
                    ("str.splitre", [u, e]) => Ok(SeqTerm::split(self.regex(e)?, self.str(u)?)),
                    ("str.matchall", [u, e]) => Ok(SeqTerm::match_all(self.regex(e)?, self.str(u)?)),
                    _ => match self.infer(t)? {
                        Some(s) if s != Sort::Seq => sort_err(pos, head, format!("expected (Seq String), found {s}")),
                        _ => syntax(pos, format!("unsupported sequence term {t}")),
                    },
                }
            }
        }
    }
}

fn rel(op: &str) -> Rel {
    match op {
        "<" => Rel::Lt,
        "<=" => Rel::Le,
        ">" => Rel::Gt,
        ">=" => Rel::Ge,
        _ => Rel::Eq,
    }
}

pub fn parse_script(src: &str) -> Result<SeqStrScript, FrontendError> {
    let cmds = parse_all(src)?;
    let mut p = Parser::default();
    for c in &cmds {
        p.command(c)?;
    }
    Ok(p.script)
}
