//! Bounded exhaustive search for models.
//!
//! Straight-line scripts are searched over their source variables only;
//! defined variables are computed forward. Other scripts enumerate every
//! variable. Atoms are checked as soon as all their variables are known.

use super::{check_model, eval_atom, eval_seq, eval_str, Assignment, Value};
use crate::alphabet::{Sym, Word};
use crate::frontend::{
    check_straight_line, defined_var, normalize, Atom, IntTerm, SeqStrScript, SeqTerm, Sort, StrTerm,
};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteResult {
    Sat(Assignment),
    NoModelWithinBounds,
}

fn int_vars(t: &IntTerm, out: &mut BTreeSet<String>) {
    match t {
        IntTerm::Const(_) => {}
        IntTerm::Var(v) => {
            out.insert(v.clone());
        }
        IntTerm::Add(a, b) | IntTerm::Sub(a, b) => {
            int_vars(a, out);
            int_vars(b, out);
        }
        IntTerm::Mul(_, a) => int_vars(a, out),
        IntTerm::StrLen(x) => str_vars(x, out),
        IntTerm::SeqLen(s) => seq_vars(s, out),
    }
}

fn str_vars(t: &StrTerm, out: &mut BTreeSet<String>) {
    match t {
        StrTerm::Lit(_) => {}
        StrTerm::Var(v) => {
            out.insert(v.clone());
        }
        StrTerm::Concat(a, b) => {
            str_vars(a, out);
            str_vars(b, out);
        }
        StrTerm::Nth(s, i) => {
            seq_vars(s, out);
            int_vars(i, out);
        }
        StrTerm::Join(s, _) => seq_vars(s, out),
    }
}

fn seq_vars(t: &SeqTerm, out: &mut BTreeSet<String>) {
    match t {
        SeqTerm::Lit(_) => {}
        SeqTerm::Var(v) => {
            out.insert(v.clone());
        }
        SeqTerm::Unit(x) | SeqTerm::Split(_, x) | SeqTerm::MatchAll(_, x) => str_vars(x, out),
        SeqTerm::Concat(a, b) => {
            seq_vars(a, out);
            seq_vars(b, out);
        }
        SeqTerm::Write(s, i, u) => {
            seq_vars(s, out);
            int_vars(i, out);
            str_vars(u, out);
        }
        SeqTerm::Filter(_, s) => seq_vars(s, out),
        SeqTerm::Subseq(s, i, j) => {
            seq_vars(s, out);
            int_vars(i, out);
            int_vars(j, out);
        }
    }
}

pub(crate) fn atom_vars(a: &Atom) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    match a {
        Atom::IntCmp(x, _, y) => {
            int_vars(x, &mut out);
            int_vars(y, &mut out);
        }
        Atom::StrEq(x, y) => {
            str_vars(x, &mut out);
            str_vars(y, &mut out);
        }
        Atom::SeqEq(x, y) => {
            seq_vars(x, &mut out);
            seq_vars(y, &mut out);
        }
        Atom::InRe(x, _) => str_vars(x, &mut out),
    }
    out
}

/// All words over `alpha` of length at most `max_len`, shortest first.
pub(crate) fn words_up_to(alpha: &[Sym], max_len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &c in alpha {
                let mut x: Word = w.clone();
                x.push(c);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn seqs_up_to(words: &[Word], max_seq: usize) -> Vec<Vec<Word>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<Word>> = vec![Vec::new()];
    for _ in 0..max_seq {
        let mut next = Vec::new();
        for s in &layer {
            for w in words {
                let mut x = s.clone();
                x.push(w.clone());
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

struct Search<'a> {
    original: &'a SeqStrScript,
    atoms: Vec<(Atom, BTreeSet<String>)>,
    /// `(defined variable, rhs atom index)`
    defs: Vec<(String, usize)>,
    sources: Vec<(String, Vec<Value>)>,
}

impl Search<'_> {
    fn ready(m: &Assignment, vars: &BTreeSet<String>) -> bool {
        vars.iter().all(|v| m.contains_key(v))
    }

    /// Computes every definition whose inputs are known. Returns the
    /// variables assigned, or `None` if some definition is undefined.
    fn propagate(&self, m: &mut Assignment, added: &mut Vec<String>) -> bool {
        loop {
            let mut progress = false;
            for (x, i) in &self.defs {
                if m.contains_key(x) {
                    continue;
                }
                let (atom, vars) = &self.atoms[*i];
                let inputs_ready = vars.iter().all(|v| v == x || m.contains_key(v));
                if !inputs_ready {
                    continue;
                }
                let val = match atom {
                    Atom::StrEq(_, rhs) => eval_str(rhs, m).map(Value::Str),
                    Atom::SeqEq(_, rhs) => eval_seq(rhs, m).map(Value::Seq),
                    _ => None,
                };
                let Some(val) = val else { return false };
                m.insert(x.clone(), val);
                added.push(x.clone());
                progress = true;
            }
            if !progress {
                return true;
            }
        }
    }

    fn consistent(&self, m: &Assignment) -> bool {
        self.atoms
            .iter()
            .all(|(a, vars)| !Self::ready(m, vars) || eval_atom(a, m))
    }

    fn run(&self, k: usize, m: &mut Assignment) -> bool {
        if k == self.sources.len() {
            let restricted: Assignment = self
                .original
                .decls
                .iter()
                .filter_map(|(n, _)| m.get(n).map(|v| (n.clone(), v.clone())))
                .collect();
            return check_model(self.original, &restricted);
        }
        let (var, cands) = &self.sources[k];
        for c in cands {
            m.insert(var.clone(), c.clone());
            let mut added = Vec::new();
            if self.propagate(m, &mut added) && self.consistent(m) && self.run(k + 1, m) {
                return true;
            }
            for a in added {
                m.remove(&a);
            }
            m.remove(var);
        }
        false
    }
}

/// Searches strings of length at most `max_len` over `alpha`, sequences of
/// at most `max_seq` such strings, and integers in
/// `[-1, max(max_len, max_seq) + 2]`. Variables defined in a straight-line
/// script are computed rather than enumerated, so their values may exceed
/// the bounds. Returned models cover the script's declared variables.
pub fn brute_force_sat(s: &SeqStrScript, max_len: usize, max_seq: usize, alpha: &[Sym]) -> BruteResult {
    let n = normalize(s);
    let straight = check_straight_line(&n).is_ok();
    let atoms: Vec<(Atom, BTreeSet<String>)> = n.assertions.iter().map(|a| (a.clone(), atom_vars(a))).collect();
    let mut defs = Vec::new();
    let mut defined = BTreeSet::new();
    if straight {
        for (i, (a, _)) in atoms.iter().enumerate() {
            if let Some(x) = defined_var(a) {
                defs.push((x.to_string(), i));
                defined.insert(x.to_string());
            }
        }
    }
    let words = words_up_to(alpha, max_len);
    let mut seqs: Option<Vec<Vec<Word>>> = None;
    let hi = max_len.max(max_seq) as i64 + 2;
    let mut str_sources = Vec::new();
    let mut int_sources = Vec::new();
    for (x, sort) in &n.decls {
        if defined.contains(x) {
            continue;
        }
        let fixed = atoms.iter().find_map(|(a, _)| match a {
            Atom::StrEq(StrTerm::Var(v), StrTerm::Lit(w)) if v == x => Some(Value::Str(w.clone())),
            Atom::SeqEq(SeqTerm::Var(v), SeqTerm::Lit(l)) if v == x => Some(Value::Seq(l.clone())),
            _ => None,
        });
        let cands: Vec<Value> = match (fixed, sort) {
            (Some(v), _) => vec![v],
            (None, Sort::Int) => (-1..=hi).map(Value::Int).collect(),
            (None, Sort::Str) => words.iter().cloned().map(Value::Str).collect(),
            (None, Sort::Seq) => seqs
                .get_or_insert_with(|| seqs_up_to(&words, max_seq))
                .iter()
                .cloned()
                .map(Value::Seq)
                .collect(),
        };
        if *sort == Sort::Int {
            int_sources.push((x.clone(), cands));
        } else {
            str_sources.push((x.clone(), cands));
        }
    }
    str_sources.sort_by_key(|(_, c)| c.len());
    str_sources.extend(int_sources);
    let search = Search {
        original: s,
        atoms,
        defs,
        sources: str_sources,
    };
    let mut m = Assignment::new();
    let mut added = Vec::new();
    if !search.propagate(&mut m, &mut added) || !search.consistent(&m) {
        return BruteResult::NoModelWithinBounds;
    }
    if search.run(0, &mut m) {
        let model = s
            .decls
            .iter()
            .filter_map(|(x, _)| m.get(x).map(|v| (x.clone(), v.clone())))
            .collect();
        BruteResult::Sat(model)
    } else {
        BruteResult::NoModelWithinBounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::word;
    use crate::frontend::parse_script;

    fn ab() -> Vec<Sym> {
        vec!['a' as Sym, 'b' as Sym]
    }

    #[test]
    fn unsat_example_has_no_small_model() {
        let s = parse_script(
            "(declare-fun s0 () (Seq String))(declare-fun s1 () (Seq String))
             (assert (= s1 (seq.++ s0 (seq.++ (seq.unit \"u\") (seq.unit \"v\")))))
             (assert (< (seq.len s1) 2))",
        )
        .unwrap();
        assert_eq!(brute_force_sat(&s, 3, 3, &ab()), BruteResult::NoModelWithinBounds);
    }

    #[test]
    fn finds_models() {
        let s = parse_script("(declare-fun x () String)(assert (str.in_re x (re.+ (str.to_re \"a\"))))").unwrap();
        match brute_force_sat(&s, 2, 0, &ab()) {
            BruteResult::Sat(m) => assert_eq!(m["x"], Value::Str(word("a"))),
            r => panic!("{r:?}"),
        }
        let s = parse_script(
            "(declare-fun x () String)(declare-fun s () (Seq String))
             (assert (= s (str.splitre x (str.to_re \"b\"))))(assert (= (seq.len s) 3))",
        )
        .unwrap();
        match brute_force_sat(&s, 4, 0, &ab()) {
            BruteResult::Sat(m) => assert!(check_model(&s, &m)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn non_straight_line_enumerates_everything() {
        let s = parse_script(
            "(declare-fun x () String)(declare-fun y () String)
             (assert (= x (str.++ y \"a\")))(assert (= y (str.++ \"b\" x)))",
        )
        .unwrap();
        assert_eq!(brute_force_sat(&s, 3, 0, &ab()), BruteResult::NoModelWithinBounds);
        let s = parse_script(
            "(declare-fun x () String)(declare-fun y () String)
             (assert (= x (str.++ y \"a\")))(assert (= x (str.++ \"a\" y)))(assert (= (str.len x) 3))",
        )
        .unwrap();
        assert!(matches!(brute_force_sat(&s, 3, 0, &ab()), BruteResult::Sat(_)));
    }
}
