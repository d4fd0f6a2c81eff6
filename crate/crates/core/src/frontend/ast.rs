use crate::alphabet::{smt_escape, Word};
use crate::lia::Rel;
use crate::regex::Regex;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Str,
    Seq,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "Int",
            Sort::Str => "String",
            Sort::Seq => "(Seq String)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntTerm {
    Const(i64),
    Var(String),
    Add(Box<IntTerm>, Box<IntTerm>),
    Sub(Box<IntTerm>, Box<IntTerm>),
    /// Multiplication by a constant.
    Mul(i64, Box<IntTerm>),
    StrLen(Box<StrTerm>),
    SeqLen(Box<SeqTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StrTerm {
    Lit(Word),
    Var(String),
    Concat(Box<StrTerm>, Box<StrTerm>),
    Nth(Box<SeqTerm>, Box<IntTerm>),
    /// Join with a constant separator.
    Join(Box<SeqTerm>, Word),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SeqTerm {
    Lit(Vec<Word>),
    Var(String),
    Unit(Box<StrTerm>),
    Concat(Box<SeqTerm>, Box<SeqTerm>),
    /// `s[i -> u]`
    Write(Box<SeqTerm>, Box<IntTerm>, Box<StrTerm>),
    Filter(Regex, Box<SeqTerm>),
    /// `s[i, j]`: start and length.
    Subseq(Box<SeqTerm>, Box<IntTerm>, Box<IntTerm>),
    Split(Regex, Box<StrTerm>),
    MatchAll(Regex, Box<StrTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    IntCmp(IntTerm, Rel, IntTerm),
    StrEq(StrTerm, StrTerm),
    SeqEq(SeqTerm, SeqTerm),
    InRe(StrTerm, Regex),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeqStrScript {
    pub decls: Vec<(String, Sort)>,
    pub assertions: Vec<Atom>,
}

impl SeqStrScript {
    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.decls.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    pub fn vars_of_sort(&self, sort: Sort) -> impl Iterator<Item = &String> {
        self.decls.iter().filter(move |(_, s)| *s == sort).map(|(n, _)| n)
    }
}

impl IntTerm {
    pub fn var(n: &str) -> IntTerm {
        IntTerm::Var(n.to_string())
    }

    pub fn add(a: IntTerm, b: IntTerm) -> IntTerm {
        IntTerm::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: IntTerm, b: IntTerm) -> IntTerm {
        IntTerm::Sub(Box::new(a), Box::new(b))
    }

    pub fn seqlen(s: SeqTerm) -> IntTerm {
        IntTerm::SeqLen(Box::new(s))
    }

    pub fn strlen(s: StrTerm) -> IntTerm {
        IntTerm::StrLen(Box::new(s))
    }
}

impl StrTerm {
    pub fn var(n: &str) -> StrTerm {
        StrTerm::Var(n.to_string())
    }

    pub fn lit(s: &str) -> StrTerm {
        StrTerm::Lit(crate::alphabet::word(s))
    }

    pub fn concat(a: StrTerm, b: StrTerm) -> StrTerm {
        StrTerm::Concat(Box::new(a), Box::new(b))
    }

    pub fn nth(s: SeqTerm, i: IntTerm) -> StrTerm {
        StrTerm::Nth(Box::new(s), Box::new(i))
    }

    pub fn join(s: SeqTerm, sep: &str) -> StrTerm {
        StrTerm::Join(Box::new(s), crate::alphabet::word(sep))
    }
}

impl SeqTerm {
    pub fn var(n: &str) -> SeqTerm {
        SeqTerm::Var(n.to_string())
    }

    pub fn concat(a: SeqTerm, b: SeqTerm) -> SeqTerm {
        SeqTerm::Concat(Box::new(a), Box::new(b))
    }

    pub fn unit(x: StrTerm) -> SeqTerm {
        SeqTerm::Unit(Box::new(x))
    }

    pub fn write(s: SeqTerm, i: IntTerm, u: StrTerm) -> SeqTerm {
        SeqTerm::Write(Box::new(s), Box::new(i), Box::new(u))
    }

    pub fn filter(e: Regex, s: SeqTerm) -> SeqTerm {
        SeqTerm::Filter(e, Box::new(s))
    }

    pub fn subseq(s: SeqTerm, i: IntTerm, j: IntTerm) -> SeqTerm {
        SeqTerm::Subseq(Box::new(s), Box::new(i), Box::new(j))
    }

    pub fn split(e: Regex, u: StrTerm) -> SeqTerm {
        SeqTerm::Split(e, Box::new(u))
    }

    pub fn match_all(e: Regex, u: StrTerm) -> SeqTerm {
        SeqTerm::MatchAll(e, Box::new(u))
    }
}

impl fmt::Display for IntTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntTerm::Const(n) if *n < 0 => write!(f, "(- {})", n.unsigned_abs()),
            IntTerm::Const(n) => write!(f, "{n}"),
            IntTerm::Var(v) => write!(f, "{v}"),
            IntTerm::Add(a, b) => write!(f, "(+ {a} {b})"),
            IntTerm::Sub(a, b) => write!(f, "(- {a} {b})"),
            IntTerm::Mul(k, a) => write!(f, "(* {} {a})", IntTerm::Const(*k)),
            IntTerm::StrLen(s) => write!(f, "(str.len {s})"),
            IntTerm::SeqLen(s) => write!(f, "(seq.len {s})"),
        }
    }
}

impl fmt::Display for StrTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrTerm::Lit(w) => write!(f, "\"{}\"", smt_escape(w)),
            StrTerm::Var(v) => write!(f, "{v}"),
            StrTerm::Concat(a, b) => write!(f, "(str.++ {a} {b})"),
            StrTerm::Nth(s, i) => write!(f, "(seq.nth {s} {i})"),
            StrTerm::Join(s, u) => write!(f, "(seq.join {s} \"{}\")", smt_escape(u)),
        }
    }
}

impl fmt::Display for SeqTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqTerm::Lit(es) => {
                if es.is_empty() {
                    return write!(f, "(as seq.empty (Seq String))");
                }
                let units: Vec<String> = es
                    .iter()
                    .map(|e| format!("(seq.unit \"{}\")", smt_escape(e)))
                    .collect();
                if units.len() == 1 {
                    write!(f, "{}", units[0])
                } else {
                    write!(f, "(seq.++ {})", units.join(" "))
                }
            }
            SeqTerm::Var(v) => write!(f, "{v}"),
            SeqTerm::Unit(x) => write!(f, "(seq.unit {x})"),
            SeqTerm::Concat(a, b) => write!(f, "(seq.++ {a} {b})"),
            SeqTerm::Write(s, i, u) => write!(f, "(seq.update {s} {i} {u})"),
            SeqTerm::Filter(e, s) => write!(f, "(seq.filterre {s} {})", e.to_smtlib()),
            SeqTerm::Subseq(s, i, j) => write!(f, "(seq.extract {s} {i} {j})"),
            SeqTerm::Split(e, u) => write!(f, "(str.splitre {u} {})", e.to_smtlib()),
            SeqTerm::MatchAll(e, u) => write!(f, "(str.matchall {u} {})", e.to_smtlib()),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::IntCmp(a, Rel::Ne, b) => write!(f, "(not (= {a} {b}))"),
            Atom::IntCmp(a, r, b) => write!(f, "({} {a} {b})", r.symbol()),
            Atom::StrEq(a, b) => write!(f, "(= {a} {b})"),
            Atom::SeqEq(a, b) => write!(f, "(= {a} {b})"),
            Atom::InRe(x, e) => write!(f, "(str.in_re {x} {})", e.to_smtlib()),
        }
    }
}

/// Prints a complete script that `parse_script` reads back.
impl fmt::Display for SeqStrScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(set-logic QF_SSEQ)")?;
        for (n, s) in &self.decls {
            writeln!(f, "(declare-fun {n} () {s})")?;
        }
        for a in &self.assertions {
            writeln!(f, "(assert {a})")?;
        }
        writeln!(f, "(check-sat)")
    }
}
