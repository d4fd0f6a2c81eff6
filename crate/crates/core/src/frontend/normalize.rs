//! Flattening to variable-defining equalities, dependency graphs, and the
//! straight-line check.

use super::ast::{Atom, IntTerm, SeqStrScript, SeqTerm, Sort, StrTerm};
use crate::lia::Rel;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

struct Normalizer {
    out: SeqStrScript,
    used: BTreeSet<String>,
    next: usize,
}

fn falsum() -> Atom {
    Atom::IntCmp(IntTerm::Const(0), Rel::Eq, IntTerm::Const(1))
}

fn fold_str(t: StrTerm) -> StrTerm {
    match t {
        StrTerm::Concat(a, b) => match (fold_str(*a), fold_str(*b)) {
            (StrTerm::Lit(mut x), StrTerm::Lit(y)) => {
                x.extend(y);
                StrTerm::Lit(x)
            }
            (a, b) => StrTerm::concat(a, b),
        },
        other => other,
    }
}

fn fold_seq(t: SeqTerm) -> SeqTerm {
    match t {
        SeqTerm::Unit(x) => match fold_str(*x) {
            StrTerm::Lit(w) => SeqTerm::Lit(vec![w]),
            x => SeqTerm::unit(x),
        },
        SeqTerm::Concat(a, b) => match (fold_seq(*a), fold_seq(*b)) {
            (SeqTerm::Lit(mut x), SeqTerm::Lit(y)) => {
                x.extend(y);
                SeqTerm::Lit(x)
            }
            (a, b) => SeqTerm::concat(a, b),
        },
        other => other,
    }
}

fn str_flat(t: &StrTerm) -> bool {
    matches!(t, StrTerm::Var(_) | StrTerm::Lit(_))
}

fn seq_flat(t: &SeqTerm) -> bool {
    matches!(t, SeqTerm::Var(_) | SeqTerm::Lit(_))
}

impl Normalizer {
    fn fresh(&mut self, sort: Sort) -> String {
        loop {
            let n = format!("_t{}", self.next);
            self.next += 1;
            if self.used.insert(n.clone()) {
                self.out.decls.push((n.clone(), sort));
                return n;
            }
        }
    }

    fn int(&mut self, t: IntTerm) -> IntTerm {
        match t {
            IntTerm::Add(a, b) => IntTerm::add(self.int(*a), self.int(*b)),
            IntTerm::Sub(a, b) => IntTerm::sub(self.int(*a), self.int(*b)),
            IntTerm::Mul(k, a) => IntTerm::Mul(k, Box::new(self.int(*a))),
            IntTerm::StrLen(x) => match self.flat_str(*x) {
                StrTerm::Lit(w) => IntTerm::Const(w.len() as i64),
                v => IntTerm::strlen(v),
            },
            IntTerm::SeqLen(s) => match self.flat_seq(*s) {
                SeqTerm::Lit(es) => IntTerm::Const(es.len() as i64),
                v => IntTerm::seqlen(v),
            },
            other => other,
        }
    }

    /// A variable or literal equal to `t`.
    fn flat_str(&mut self, t: StrTerm) -> StrTerm {
        let t = fold_str(t);
        if str_flat(&t) {
            return t;
        }
        let rhs = self.op_str(t);
        let v = self.fresh(Sort::Str);
        self.out.assertions.push(Atom::StrEq(StrTerm::Var(v.clone()), rhs));
        StrTerm::Var(v)
    }

    fn flat_seq(&mut self, t: SeqTerm) -> SeqTerm {
        let t = fold_seq(t);
        if seq_flat(&t) {
            return t;
        }
        let rhs = self.op_seq(t);
        let v = self.fresh(Sort::Seq);
        self.out.assertions.push(Atom::SeqEq(SeqTerm::Var(v.clone()), rhs));
        SeqTerm::Var(v)
    }

    /// One operation applied to flat arguments.
    fn op_str(&mut self, t: StrTerm) -> StrTerm {
        match fold_str(t) {
            StrTerm::Concat(a, b) => StrTerm::concat(self.flat_str(*a), self.flat_str(*b)),
            StrTerm::Nth(s, i) => StrTerm::nth(self.flat_seq(*s), self.int(*i)),
            StrTerm::Join(s, u) => StrTerm::Join(Box::new(self.flat_seq(*s)), u),
            flat => flat,
        }
    }

    fn op_seq(&mut self, t: SeqTerm) -> SeqTerm {
        match fold_seq(t) {
            SeqTerm::Unit(x) => SeqTerm::unit(self.flat_str(*x)),
            SeqTerm::Concat(a, b) => SeqTerm::concat(self.flat_seq(*a), self.flat_seq(*b)),
            SeqTerm::Write(s, i, u) => {
                let s = self.flat_seq(*s);
                let i = self.int(*i);
                SeqTerm::write(s, i, self.flat_str(*u))
            }
            SeqTerm::Filter(e, s) => SeqTerm::filter(e, self.flat_seq(*s)),
            SeqTerm::Subseq(s, i, j) => {
                let s = self.flat_seq(*s);
                let i = self.int(*i);
                SeqTerm::subseq(s, i, self.int(*j))
            }
            SeqTerm::Split(e, u) => SeqTerm::split(e, self.flat_str(*u)),
            SeqTerm::MatchAll(e, u) => SeqTerm::match_all(e, self.flat_str(*u)),
            flat => flat,
        }
    }

    fn str_eq(&mut self, a: StrTerm, b: StrTerm) {
        let (a, b) = (fold_str(a), fold_str(b));
        let atom = match (a, b) {
            (StrTerm::Var(x), StrTerm::Var(y)) if x == y => return,
            (StrTerm::Lit(x), StrTerm::Lit(y)) => {
                if x != y {
                    self.out.assertions.push(falsum());
                }
                return;
            }
            (StrTerm::Var(x), rhs) | (rhs, StrTerm::Var(x)) => {
                let rhs = self.op_str(rhs);
                Atom::StrEq(StrTerm::Var(x), rhs)
            }
            (StrTerm::Lit(w), other) | (other, StrTerm::Lit(w)) => {
                let v = self.flat_str(other);
                Atom::StrEq(v, StrTerm::Lit(w))
            }
            (a, b) => {
                let x = self.flat_str(a);
                let y = self.flat_str(b);
                Atom::StrEq(x, y)
            }
        };
        self.out.assertions.push(atom);
    }

    fn seq_eq(&mut self, a: SeqTerm, b: SeqTerm) {
        let (a, b) = (fold_seq(a), fold_seq(b));
        let atom = match (a, b) {
            (SeqTerm::Var(x), SeqTerm::Var(y)) if x == y => return,
            (SeqTerm::Lit(x), SeqTerm::Lit(y)) => {
                if x != y {
                    self.out.assertions.push(falsum());
                }
                return;
            }
            (SeqTerm::Var(x), rhs) | (rhs, SeqTerm::Var(x)) => {
                let rhs = self.op_seq(rhs);
                Atom::SeqEq(SeqTerm::Var(x), rhs)
            }
            (SeqTerm::Lit(w), other) | (other, SeqTerm::Lit(w)) => {
                let v = self.flat_seq(other);
                Atom::SeqEq(v, SeqTerm::Lit(w))
            }
            (a, b) => {
                let x = self.flat_seq(a);
                let y = self.flat_seq(b);
                Atom::SeqEq(x, y)
            }
        };
        self.out.assertions.push(atom);
    }

    fn atom(&mut self, a: Atom) {
        match a {
            Atom::IntCmp(x, r, y) => {
                let x = self.int(x);
                let y = self.int(y);
                self.out.assertions.push(Atom::IntCmp(x, r, y));
            }
            Atom::InRe(x, e) => {
                let v = match fold_str(x) {
                    StrTerm::Lit(w) => {
                        let v = self.fresh(Sort::Str);
                        self.out
                            .assertions
                            .push(Atom::StrEq(StrTerm::Var(v.clone()), StrTerm::Lit(w)));
                        StrTerm::Var(v)
                    }
                    other => self.flat_str(other),
                };
                self.out.assertions.push(Atom::InRe(v, e));
            }
            Atom::StrEq(a, b) => self.str_eq(a, b),
            Atom::SeqEq(a, b) => self.seq_eq(a, b),
        }
    }
}

/// The variable defined by an assertion, if it is a definition. Equalities
/// with a literal right-hand side are constraints, not definitions.
pub fn defined_var(a: &Atom) -> Option<&str> {
    match a {
        Atom::StrEq(StrTerm::Var(x), rhs) if !matches!(rhs, StrTerm::Lit(_)) => Some(x),
        Atom::SeqEq(SeqTerm::Var(x), rhs) if !matches!(rhs, SeqTerm::Lit(_)) => Some(x),
        _ => None,
    }
}

fn definition_counts(s: &SeqStrScript) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for a in &s.assertions {
        if let Some(x) = defined_var(a) {
            *m.entry(x.to_string()).or_insert(0) += 1;
        }
    }
    m
}

/// Rewrites `s` so that every string/sequence equality has a variable on
/// the left and a single operation over variables/literals on the right.
pub fn normalize(s: &SeqStrScript) -> SeqStrScript {
    let mut n = Normalizer {
        out: SeqStrScript {
            decls: s.decls.clone(),
            assertions: Vec::new(),
        },
        used: s.decls.iter().map(|(x, _)| x.clone()).collect(),
        next: 0,
    };
    for a in &s.assertions {
        n.atom(a.clone());
    }
    let mut out = n.out;
    // Orient `x = y` towards the side that has no other definition.
    let mut counts = definition_counts(&out);
    for a in out.assertions.iter_mut() {
        let swapped = match a {
            Atom::StrEq(StrTerm::Var(x), StrTerm::Var(y)) | Atom::SeqEq(SeqTerm::Var(x), SeqTerm::Var(y)) => {
                if counts.get(x.as_str()).copied().unwrap_or(0) > 1 && counts.get(y.as_str()).copied().unwrap_or(0) == 0 {
                    std::mem::swap(x, y);
                    Some((y.clone(), x.clone()))
                } else {
                    None
                }
            }
            _ => None,
        };
        if let Some((old, new)) = swapped {
            *counts.get_mut(&old).unwrap() -= 1;
            *counts.entry(new).or_insert(0) += 1;
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

fn str_vars(t: &StrTerm, out: &mut BTreeSet<String>) {
    match t {
        StrTerm::Lit(_) => {}
        StrTerm::Var(x) => {
            out.insert(x.clone());
        }
        StrTerm::Concat(a, b) => {
            str_vars(a, out);
            str_vars(b, out);
        }
        StrTerm::Nth(s, _) | StrTerm::Join(s, _) => seq_vars(s, out),
    }
}

/// Variables occurring outside integer terms.
fn seq_vars(t: &SeqTerm, out: &mut BTreeSet<String>) {
    match t {
        SeqTerm::Lit(_) => {}
        SeqTerm::Var(x) => {
            out.insert(x.clone());
        }
        SeqTerm::Unit(x) | SeqTerm::Split(_, x) | SeqTerm::MatchAll(_, x) => str_vars(x, out),
        SeqTerm::Concat(a, b) => {
            seq_vars(a, out);
            seq_vars(b, out);
        }
        SeqTerm::Write(s, _, u) => {
            seq_vars(s, out);
            str_vars(u, out);
        }
        SeqTerm::Filter(_, s) | SeqTerm::Subseq(s, _, _) => seq_vars(s, out),
    }
}

pub fn dependency_graph(s: &SeqStrScript) -> DependencyGraph {
    let mut g = DependencyGraph {
        vertices: s
            .decls
            .iter()
            .filter(|(_, so)| *so != Sort::Int)
            .map(|(n, _)| n.clone())
            .collect(),
        ..Default::default()
    };
    for a in &s.assertions {
        let Some(x) = defined_var(a) else { continue };
        let mut occ = BTreeSet::new();
        match a {
            Atom::StrEq(_, rhs) => str_vars(rhs, &mut occ),
            Atom::SeqEq(_, rhs) => seq_vars(rhs, &mut occ),
            _ => {}
        }
        for y in occ {
            g.edges.insert((x.to_string(), y));
        }
    }
    g
}

impl DependencyGraph {
    pub fn successors<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a String> + 'a {
        self.edges.iter().filter(move |(a, _)| a == v).map(|(_, b)| b)
    }

    /// Some cycle, as a closed path `v0 -> ... -> v0`.
    pub fn find_cycle(&self) -> Option<Vec<String>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut mark: BTreeMap<&str, Mark> = self.vertices.iter().map(|v| (v.as_str(), Mark::New)).collect();
        for (a, b) in &self.edges {
            mark.entry(a).or_insert(Mark::New);
            mark.entry(b).or_insert(Mark::New);
        }
        let roots: Vec<&str> = mark.keys().copied().collect();
        for root in roots {
            if mark[root] != Mark::New {
                continue;
            }
            let mut path: Vec<&str> = vec![root];
            let mut iters: Vec<Vec<&str>> = vec![self.successors(root).map(|s| s.as_str()).collect()];
            mark.insert(root, Mark::Active);
            while let Some(it) = iters.last_mut() {
                match it.pop() {
                    Some(w) => match mark[w] {
                        Mark::Active => {
                            let start = path.iter().position(|&p| p == w).unwrap();
                            let mut cyc: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
                            cyc.push(w.to_string());
                            return Some(cyc);
                        }
                        Mark::New => {
                            mark.insert(w, Mark::Active);
                            path.push(w);
                            iters.push(self.successors(w).map(|s| s.as_str()).collect());
                        }
                        Mark::Done => {}
                    },
                    None => {
                        iters.pop();
                        let v = path.pop().unwrap();
                        mark.insert(v, Mark::Done);
                    }
                }
            }
        }
        None
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SlViolation {
    #[error("variable {var} is defined more than once (assertions {})", fmt_list(.assertions))]
    MultipleDefinitions { var: String, assertions: Vec<usize> },
    #[error("cyclic dependency {}", .cycle.join(" -> "))]
    Cycle { cycle: Vec<String> },
}

fn fmt_list(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

/// Checks that each variable has at most one definition and that the
/// dependency graph is acyclic. Assertion numbers in reports are 0-based
/// positions in the normalised script.
pub fn check_straight_line(s: &SeqStrScript) -> Result<(), SlViolation> {
    let mut defs: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, a) in s.assertions.iter().enumerate() {
        if let Some(x) = defined_var(a) {
            defs.entry(x).or_default().push(i);
        }
    }
    for (x, idx) in defs {
        if idx.len() > 1 {
            return Err(SlViolation::MultipleDefinitions {
                var: x.to_string(),
                assertions: idx,
            });
        }
    }
    match dependency_graph(s).find_cycle() {
        Some(cycle) => Err(SlViolation::Cycle { cycle }),
        None => Ok(()),
    }
}

impl fmt::Display for DependencyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in &self.edges {
            writeln!(f, "{a} -> {b}")?;
        }
        Ok(())
    }
}
