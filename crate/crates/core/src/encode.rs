//! Translation of sequence constraints into string constraints over the
//! alphabet extended with the separator.
//!
//! A sequence `(u1, ..., um)` becomes `†u1†...†um†`; the empty sequence is
//! `†`. Indices shift by one at the string level: the element at position
//! `i` follows the `(i+1)`-th separator.

use crate::alphabet::{encode_seq, show_word, Sym, Universe, Word, MAX_CHAR, SEP};
use crate::automata::{compile_regex, Nfa};
use crate::frontend::{Atom, IntTerm, SeqStrScript, SeqTerm, Sort, StrTerm};
use crate::lia::{LiaFormula, LinExpr};
use crate::regex::Regex;
use crate::transducers::Transducer;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("sequence element contains the separator")]
    SeparatorInElement,
    #[error("assertion is not in normal form: {0}")]
    NotNormalized(String),
}

/// How a string variable of the encoded script is constrained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XKind {
    /// A user string: no separators.
    Plain,
    /// An encoded sequence.
    Encoded,
    /// An intermediate value with no format constraint.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum XOp {
    Copy(String),
    Concat(String, String),
    /// Concatenation of two encoded sequences: the shared separator is
    /// written once.
    SeqConcat(String, String),
    Transduce(Transducer, String),
    /// `write(x, k, y)` with the 1-based string-level index `k`.
    Write(String, LinExpr, String),
    /// `subseq(x, k, j)`: `j` elements starting after the `k`-th separator.
    Subseq(String, LinExpr, LinExpr),
    /// The element after the `k`-th separator.
    Elem(String, LinExpr),
}

impl XOp {
    pub fn args(&self) -> Vec<&str> {
        match self {
            XOp::Copy(x) | XOp::Transduce(_, x) | XOp::Subseq(x, _, _) | XOp::Elem(x, _) => vec![x],
            XOp::Concat(x, y) | XOp::SeqConcat(x, y) | XOp::Write(x, _, y) => vec![x, y],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XDef {
    pub lhs: String,
    pub op: XOp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Re(Regex),
    Lit(Word),
}

impl Membership {
    pub fn nfa(&self) -> Nfa {
        match self {
            Membership::Re(e) => compile_regex(e),
            Membership::Lit(w) => Nfa::word(w),
        }
    }
}

/// A conjunction of string definitions, regular memberships and integer
/// constraints. Lengths appear in integer terms as the registers named by
/// [`len_register`] and [`cnt_register`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XStrScript {
    pub vars: BTreeMap<String, XKind>,
    pub int_vars: Vec<String>,
    pub defs: Vec<XDef>,
    pub memberships: Vec<(String, Membership)>,
    pub lia: Vec<LiaFormula>,
}

/// Register holding the length of `x`.
pub fn len_register(x: &str) -> String {
    format!("#len:{x}")
}

/// Register holding the number of separators in `x`.
pub fn cnt_register(x: &str) -> String {
    format!("#cnt:{x}")
}

impl XStrScript {
    /// Variables whose length or separator count is referenced, with the
    /// register name.
    pub fn counters(&self) -> BTreeSet<(String, String)> {
        let mut regs = BTreeSet::new();
        for f in &self.lia {
            f.free_vars(&mut regs);
        }
        let mut collect = |e: &LinExpr| {
            for v in e.vars() {
                regs.insert(v.clone());
            }
        };
        for d in &self.defs {
            match &d.op {
                XOp::Write(_, k, _) | XOp::Elem(_, k) => collect(k),
                XOp::Subseq(_, k, j) => {
                    collect(k);
                    collect(j);
                }
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        for r in regs {
            if let Some(x) = r.strip_prefix("#len:").or_else(|| r.strip_prefix("#cnt:")) {
                out.insert((x.to_string(), r.clone()));
            }
        }
        out
    }

    pub fn definition_of(&self, x: &str) -> Option<&XDef> {
        self.defs.iter().find(|d| d.lhs == x)
    }
}

/// The encoding of a sequence value.
pub fn enc_value(s: &[Word]) -> Result<Word, EncodeError> {
    if s.iter().any(|e| e.contains(&SEP)) {
        return Err(EncodeError::SeparatorInElement);
    }
    Ok(encode_seq(s))
}

/// `A0` accepts well-formed encodings `†(Σ*†)*`; `A1` accepts `Σ*`.
pub fn format_automata() -> (Nfa, Nfa) {
    let mut a0 = Nfa::new();
    let q0 = a0.add_state(false);
    let q1 = a0.add_state(true);
    let q2 = a0.add_state(false);
    a0.initial.push(q0);
    a0.add_trans(q0, SEP, SEP, q1);
    a0.add_trans(q1, 0, MAX_CHAR, q2);
    a0.add_trans(q1, SEP, SEP, q1);
    a0.add_trans(q2, 0, MAX_CHAR, q2);
    a0.add_trans(q2, SEP, SEP, q1);
    (a0, Nfa::universal(Universe::Sigma))
}

struct Encoder {
    out: XStrScript,
    used: BTreeSet<String>,
    next: usize,
}

fn bad<T: fmt::Debug>(t: &T) -> EncodeError {
    EncodeError::NotNormalized(format!("{t:?}"))
}

impl Encoder {
    fn fresh(&mut self, kind: XKind) -> String {
        loop {
            let n = format!("_e{}", self.next);
            self.next += 1;
            if self.used.insert(n.clone()) {
                self.out.vars.insert(n.clone(), kind);
                return n;
            }
        }
    }

    fn lit_var(&mut self, w: Word, kind: XKind) -> String {
        let v = self.fresh(kind);
        self.out.memberships.push((v.clone(), Membership::Lit(w)));
        v
    }

    fn int(&self, t: &IntTerm) -> Result<LinExpr, EncodeError> {
        Ok(match t {
            IntTerm::Const(n) => LinExpr::constant(*n),
            IntTerm::Var(v) => LinExpr::var(v.clone()),
            IntTerm::Add(a, b) => self.int(a)?.add(&self.int(b)?),
            IntTerm::Sub(a, b) => self.int(a)?.sub(&self.int(b)?),
            IntTerm::Mul(k, a) => self.int(a)?.scale(*k),
            IntTerm::StrLen(x) => match &**x {
                StrTerm::Var(x) => LinExpr::var(len_register(x)),
                StrTerm::Lit(w) => LinExpr::constant(w.len() as i64),
                other => return Err(bad(other)),
            },
            IntTerm::SeqLen(s) => match &**s {
                SeqTerm::Var(s) => LinExpr::var(cnt_register(s)).plus_const(-1),
                SeqTerm::Lit(l) => LinExpr::constant(l.len() as i64),
                other => return Err(bad(other)),
            },
        })
    }

    fn str_arg(&mut self, t: &StrTerm) -> Result<String, EncodeError> {
        match t {
            StrTerm::Var(v) => Ok(v.clone()),
            StrTerm::Lit(w) => Ok(self.lit_var(w.clone(), XKind::Plain)),
            other => Err(bad(other)),
        }
    }

    fn seq_arg(&mut self, t: &SeqTerm) -> Result<String, EncodeError> {
        match t {
            SeqTerm::Var(v) => Ok(v.clone()),
            SeqTerm::Lit(l) => {
                let w = enc_value(l)?;
                Ok(self.lit_var(w, XKind::Encoded))
            }
            other => Err(bad(other)),
        }
    }

    fn def(&mut self, lhs: &str, op: XOp) {
        self.out.defs.push(XDef { lhs: lhs.to_string(), op });
    }

    fn str_def(&mut self, x: &str, rhs: &StrTerm) -> Result<(), EncodeError> {
        let op = match rhs {
            StrTerm::Lit(w) => {
                self.out.memberships.push((x.to_string(), Membership::Lit(w.clone())));
                return Ok(());
            }
            StrTerm::Var(y) => XOp::Copy(y.clone()),
            StrTerm::Concat(a, b) => XOp::Concat(self.str_arg(a)?, self.str_arg(b)?),
            StrTerm::Nth(s, i) => XOp::Elem(self.seq_arg(s)?, self.int(i)?.plus_const(1)),
            StrTerm::Join(s, u) => XOp::Transduce(Transducer::Join(u.clone()), self.seq_arg(s)?),
        };
        self.def(x, op);
        Ok(())
    }

    fn seq_def(&mut self, x: &str, rhs: &SeqTerm) -> Result<(), EncodeError> {
        let op = match rhs {
            SeqTerm::Lit(l) => {
                let w = enc_value(l)?;
                self.out.memberships.push((x.to_string(), Membership::Lit(w)));
                return Ok(());
            }
            SeqTerm::Var(y) => XOp::Copy(y.clone()),
            SeqTerm::Unit(u) => {
                // †u† as †·(u·†)
                let u = self.str_arg(u)?;
                let open = self.lit_var(vec![SEP], XKind::Raw);
                let close = self.lit_var(vec![SEP], XKind::Raw);
                let tail = self.fresh(XKind::Raw);
                self.def(&tail, XOp::Concat(u, close));
                XOp::Concat(open, tail)
            }
            SeqTerm::Concat(a, b) => XOp::SeqConcat(self.seq_arg(a)?, self.seq_arg(b)?),
            SeqTerm::Write(s, i, u) => {
                let s = self.seq_arg(s)?;
                let u = self.str_arg(u)?;
                XOp::Write(s, self.int(i)?.plus_const(1), u)
            }
            SeqTerm::Filter(e, s) => XOp::Transduce(Transducer::Filter(e.clone()), self.seq_arg(s)?),
            SeqTerm::Subseq(s, i, j) => {
                let s = self.seq_arg(s)?;
                XOp::Subseq(s, self.int(i)?.plus_const(1), self.int(j)?)
            }
            SeqTerm::Split(e, u) => XOp::Transduce(Transducer::SplitStr(e.clone()), self.str_arg(u)?),
            SeqTerm::MatchAll(e, u) => XOp::Transduce(Transducer::MatchAllStr(e.clone()), self.str_arg(u)?),
        };
        self.def(x, op);
        Ok(())
    }

    fn atom(&mut self, a: &Atom) -> Result<(), EncodeError> {
        match a {
            Atom::IntCmp(x, r, y) => {
                let f = LiaFormula::cmp(self.int(x)?, *r, self.int(y)?);
                self.out.lia.push(f);
            }
            Atom::InRe(x, e) => {
                let x = self.str_arg(x)?;
                self.out.memberships.push((x, Membership::Re(e.clone())));
            }
            Atom::StrEq(StrTerm::Var(x), rhs) => self.str_def(x, rhs)?,
            Atom::SeqEq(SeqTerm::Var(x), rhs) => self.seq_def(x, rhs)?,
            other => return Err(bad(other)),
        }
        Ok(())
    }
}

/// Encodes a normalised script. Each definition `x = op(..)` of the input
/// yields one definition of `x` (plus helper definitions for `seq.unit`);
/// literal arguments become fresh variables fixed by a membership.
pub fn enc_formula(s: &SeqStrScript) -> Result<XStrScript, EncodeError> {
    let mut e = Encoder {
        out: XStrScript::default(),
        used: s.decls.iter().map(|(x, _)| x.clone()).collect(),
        next: 0,
    };
    for (x, sort) in &s.decls {
        match sort {
            Sort::Int => e.out.int_vars.push(x.clone()),
            Sort::Str => {
                e.out.vars.insert(x.clone(), XKind::Plain);
            }
            Sort::Seq => {
                e.out.vars.insert(x.clone(), XKind::Encoded);
            }
        }
    }
    for a in &s.assertions {
        e.atom(a)?;
    }
    Ok(e.out)
}

fn show_sep_word(w: &[Sym]) -> String {
    format!("\"{}\"", show_word(w))
}

impl fmt::Display for XOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XOp::Copy(x) => write!(f, "{x}"),
            XOp::Concat(x, y) => write!(f, "{x} . {y}"),
            XOp::SeqConcat(x, y) => write!(f, "{x} ++ {y}"),
            XOp::Transduce(t, x) => write!(f, "{t}({x})"),
            XOp::Write(x, k, y) => write!(f, "write({x}, {k}, {y})"),
            XOp::Subseq(x, k, j) => write!(f, "subseq({x}, {k}, {j})"),
            XOp::Elem(x, k) => write!(f, "elem({x}, {k})"),
        }
    }
}

impl fmt::Display for XStrScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, k) in &self.vars {
            writeln!(f, "var {x} : {k:?}")?;
        }
        for x in &self.int_vars {
            writeln!(f, "int {x}")?;
        }
        for d in &self.defs {
            writeln!(f, "{} = {}", d.lhs, d.op)?;
        }
        for (x, m) in &self.memberships {
            match m {
                Membership::Re(e) => writeln!(f, "{x} in {e}")?,
                Membership::Lit(w) => writeln!(f, "{x} = {}", show_sep_word(w))?,
            }
        }
        for l in &self.lia {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{sep_word, word};
    use crate::frontend::{normalize, parse_script};
    use crate::lia::Rel;

    #[test]
    fn values() {
        assert_eq!(enc_value(&[word("ab"), word("ac")]).unwrap(), sep_word("†ab†ac†"));
        assert_eq!(enc_value(&[]).unwrap(), sep_word("†"));
        assert_eq!(enc_value(&[word(""), word("a")]).unwrap(), sep_word("††a†"));
        assert_eq!(enc_value(&[vec![SEP]]), Err(EncodeError::SeparatorInElement));
    }

    #[test]
    fn formats() {
        let (a0, a1) = format_automata();
        for (w, ok) in [("†", true), ("†ab†ac†", true), ("††", true), ("ab†", false), ("", false), ("†a", false)] {
            assert_eq!(a0.accepts(&sep_word(w)), ok, "{w}");
        }
        assert!(a1.accepts(&word("ab")));
        assert!(a1.accepts(&word("")));
        assert!(!a1.accepts(&sep_word("a†b")));
    }

    #[test]
    fn unsat_example() {
        let s = parse_script(
            "(declare-fun s0 () (Seq String))(declare-fun s1 () (Seq String))
             (assert (= s1 (seq.++ s0 (seq.++ (seq.unit \"u\") (seq.unit \"v\")))))
             (assert (< (seq.len s1) 2))",
        )
        .unwrap();
        let x = enc_formula(&normalize(&s)).unwrap();
        assert_eq!(x.vars["s1"], XKind::Encoded);
        let d = x.definition_of("s1").unwrap();
        let XOp::SeqConcat(a, b) = &d.op else { panic!("{x}") };
        assert_eq!(a, "s0");
        assert!(x
            .memberships
            .iter()
            .any(|(v, m)| v == b && *m == Membership::Lit(sep_word("†u†v†"))));
        let cnt = LinExpr::var(cnt_register("s1")).plus_const(-1);
        assert_eq!(x.lia, vec![LiaFormula::cmp(cnt, Rel::Lt, LinExpr::constant(2))]);
        assert_eq!(
            x.counters().into_iter().collect::<Vec<_>>(),
            vec![("s1".to_string(), cnt_register("s1"))]
        );
    }

    #[test]
    fn index_shift() {
        let s = parse_script(
            "(declare-fun s () (Seq String))(declare-fun x () String)(declare-fun i () Int)
             (declare-fun t () (Seq String))
             (assert (= x (seq.nth s i)))(assert (= t (seq.extract s i (str.len x))))",
        )
        .unwrap();
        let x = enc_formula(&normalize(&s)).unwrap();
        assert_eq!(x.definition_of("x").unwrap().op, XOp::Elem("s".into(), LinExpr::var("i").plus_const(1)));
        assert_eq!(
            x.definition_of("t").unwrap().op,
            XOp::Subseq("s".into(), LinExpr::var("i").plus_const(1), LinExpr::var(len_register("x")))
        );
    }

    #[test]
    fn strings_only() {
        let s = parse_script(
            "(declare-fun x () String)(declare-fun y () String)
             (assert (= x (str.++ y \"a\")))(assert (str.in_re y (re.* (str.to_re \"b\"))))",
        )
        .unwrap();
        let x = enc_formula(&normalize(&s)).unwrap();
        assert!(x.vars.values().all(|k| *k == XKind::Plain));
        assert_eq!(x.defs.len(), 1);
    }
}
