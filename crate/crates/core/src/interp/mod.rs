//! Reference semantics of every operation, model checking, and a bounded
//! brute-force satisfiability oracle.

pub(crate) mod brute;
mod matcher;

pub use brute::{brute_force_sat, BruteResult};
pub use matcher::{derivative, longest_match_at, match_spans, regex_matches};

use crate::alphabet::{decode_seq, encode_seq, Sym, Word, SEP};
use crate::frontend::{Atom, IntTerm, SeqStrScript, SeqTerm, StrTerm};
use crate::regex::Regex;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Str(Word),
    Seq(Vec<Word>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{}", IntTerm::Const(*n)),
            Value::Str(w) => write!(f, "{}", StrTerm::Lit(w.clone())),
            Value::Seq(s) => write!(f, "{}", SeqTerm::Lit(s.clone())),
        }
    }
}

pub type Assignment = BTreeMap<String, Value>;

// Sequence-level operations. `None` means undefined.

pub fn split(e: &Regex, u: &[Sym]) -> Vec<Word> {
    let mut out = Vec::new();
    let mut prev = 0;
    for (s, t) in match_spans(e, u) {
        out.push(u[prev..s].to_vec());
        prev = t;
    }
    out.push(u[prev..].to_vec());
    out
}

pub fn match_all(e: &Regex, u: &[Sym]) -> Vec<Word> {
    match_spans(e, u).into_iter().map(|(s, t)| u[s..t].to_vec()).collect()
}

pub fn filter(e: &Regex, s: &[Word]) -> Vec<Word> {
    s.iter().filter(|x| regex_matches(e, x)).cloned().collect()
}

pub fn join(sep: &[Sym], s: &[Word]) -> Word {
    let mut out = Vec::new();
    for (k, x) in s.iter().enumerate() {
        if k > 0 {
            out.extend_from_slice(sep);
        }
        out.extend_from_slice(x);
    }
    out
}

pub fn nth(s: &[Word], i: i64) -> Option<Word> {
    usize::try_from(i).ok().and_then(|i| s.get(i)).cloned()
}

/// `s[i -> u]`; out-of-range writes leave `s` unchanged.
pub fn write(s: &[Word], i: i64, u: &[Sym]) -> Vec<Word> {
    let mut out = s.to_vec();
    if let Some(slot) = usize::try_from(i).ok().and_then(|i| out.get_mut(i)) {
        *slot = u.to_vec();
    }
    out
}

/// `s[i, j]`: `j` elements from `i`, clamped at the end.
pub fn subseq(s: &[Word], i: i64, j: i64) -> Option<Vec<Word>> {
    if i < 0 || i >= s.len() as i64 || j < 0 {
        return None;
    }
    let i = i as usize;
    let end = (i as i64).saturating_add(j).min(s.len() as i64) as usize;
    Some(s[i..end].to_vec())
}

// String-level counterparts over encoded sequences. Inputs that are not
// well-formed encodings give `None`.

pub fn filter_str(e: &Regex, w: &[Sym]) -> Option<Word> {
    Some(encode_seq(&filter(e, &decode_seq(w)?)))
}

pub fn splitstr(e: &Regex, u: &[Sym]) -> Option<Word> {
    if u.contains(&SEP) {
        return None;
    }
    Some(encode_seq(&split(e, u)))
}

pub fn matchallstr(e: &Regex, u: &[Sym]) -> Option<Word> {
    if u.contains(&SEP) {
        return None;
    }
    Some(encode_seq(&match_all(e, u)))
}

pub fn join_str(sep: &[Sym], w: &[Sym]) -> Option<Word> {
    Some(join(sep, &decode_seq(w)?))
}

/// `write(w, k, u)` replaces the element after the `k`-th separator.
pub fn write_str(w: &[Sym], k: i64, u: &[Sym]) -> Option<Word> {
    Some(encode_seq(&write(&decode_seq(w)?, k - 1, u)))
}

pub fn subseq_str(w: &[Sym], k: i64, j: i64) -> Option<Word> {
    Some(encode_seq(&subseq(&decode_seq(w)?, k - 1, j)?))
}

pub fn elem_str(w: &[Sym], k: i64) -> Option<Word> {
    nth(&decode_seq(w)?, k - 1)
}

/// Number of separators.
pub fn seqlen_str(w: &[Sym]) -> i64 {
    w.iter().filter(|&&c| c == SEP).count() as i64
}

pub fn eval_int(t: &IntTerm, m: &Assignment) -> Option<i64> {
    match t {
        IntTerm::Const(n) => Some(*n),
        IntTerm::Var(v) => match m.get(v)? {
            Value::Int(n) => Some(*n),
            _ => None,
        },
        IntTerm::Add(a, b) => eval_int(a, m)?.checked_add(eval_int(b, m)?),
        IntTerm::Sub(a, b) => eval_int(a, m)?.checked_sub(eval_int(b, m)?),
        IntTerm::Mul(k, a) => eval_int(a, m)?.checked_mul(*k),
        IntTerm::StrLen(x) => Some(eval_str(x, m)?.len() as i64),
        IntTerm::SeqLen(s) => Some(eval_seq(s, m)?.len() as i64),
    }
}

pub fn eval_str(t: &StrTerm, m: &Assignment) -> Option<Word> {
    match t {
        StrTerm::Lit(w) => Some(w.clone()),
        StrTerm::Var(v) => match m.get(v)? {
            Value::Str(w) => Some(w.clone()),
            _ => None,
        },
        StrTerm::Concat(a, b) => {
            let mut x = eval_str(a, m)?;
            x.extend(eval_str(b, m)?);
            Some(x)
        }
        StrTerm::Nth(s, i) => nth(&eval_seq(s, m)?, eval_int(i, m)?),
        StrTerm::Join(s, u) => Some(join(u, &eval_seq(s, m)?)),
    }
}

pub fn eval_seq(t: &SeqTerm, m: &Assignment) -> Option<Vec<Word>> {
    match t {
        SeqTerm::Lit(s) => Some(s.clone()),
        SeqTerm::Var(v) => match m.get(v)? {
            Value::Seq(s) => Some(s.clone()),
            _ => None,
        },
        SeqTerm::Unit(x) => Some(vec![eval_str(x, m)?]),
        SeqTerm::Concat(a, b) => {
            let mut x = eval_seq(a, m)?;
            x.extend(eval_seq(b, m)?);
            Some(x)
        }
        SeqTerm::Write(s, i, u) => Some(write(&eval_seq(s, m)?, eval_int(i, m)?, &eval_str(u, m)?)),
        SeqTerm::Filter(e, s) => Some(filter(e, &eval_seq(s, m)?)),
        SeqTerm::Subseq(s, i, j) => subseq(&eval_seq(s, m)?, eval_int(i, m)?, eval_int(j, m)?),
        SeqTerm::Split(e, u) => Some(split(e, &eval_str(u, m)?)),
        SeqTerm::MatchAll(e, u) => Some(match_all(e, &eval_str(u, m)?)),
    }
}

/// Truth of an atom; undefined subterms make it false.
pub fn eval_atom(a: &Atom, m: &Assignment) -> bool {
    match a {
        Atom::IntCmp(x, r, y) => match (eval_int(x, m), eval_int(y, m)) {
            (Some(x), Some(y)) => r.holds(x, y),
            _ => false,
        },
        Atom::StrEq(x, y) => match (eval_str(x, m), eval_str(y, m)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
        Atom::SeqEq(x, y) => match (eval_seq(x, m), eval_seq(y, m)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
        Atom::InRe(x, e) => eval_str(x, m).is_some_and(|w| regex_matches(e, &w)),
    }
}

/// True iff every assertion holds under `m`. String and sequence values must
/// not contain the separator.
pub fn check_model(s: &SeqStrScript, m: &Assignment) -> bool {
    let clean = m.values().all(|v| match v {
        Value::Int(_) => true,
        Value::Str(w) => !w.contains(&SEP),
        Value::Seq(es) => es.iter().all(|w| !w.contains(&SEP)),
    });
    clean && s.assertions.iter().all(|a| eval_atom(a, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{sep_word, word};
    use crate::frontend::parse_script;
    use crate::regex::{parse_regex, Dialect};

    fn re(s: &str) -> Regex {
        parse_regex(s, Dialect::Classic).unwrap()
    }

    fn ws(xs: &[&str]) -> Vec<Word> {
        xs.iter().map(|x| word(x)).collect()
    }

    #[test]
    fn version_example() {
        let parts = split(&re("[a-zA-Z._ /-]"), &word("12a56b23"));
        assert_eq!(parts, ws(&["12", "56", "23"]));
        let mut out = parts[0].clone();
        out.extend(word("."));
        out.extend(join(&[], &subseq(&parts, 1, parts.len() as i64 - 1).unwrap()));
        assert_eq!(out, word("12.5623"));
    }

    #[test]
    fn sequence_ops() {
        assert_eq!(filter(&re("a*b"), &ws(&["ab", "ac", "aab"])), ws(&["ab", "aab"]));
        assert_eq!(filter(&re("c"), &ws(&["ab"])), ws(&[]));
        assert_eq!(match_all(&re("a+"), &word("baab")), ws(&["aa"]));
        assert_eq!(nth(&ws(&["ab", "ac"]), 0), Some(word("ab")));
        assert_eq!(nth(&ws(&["ab", "ac"]), 2), None);
        assert_eq!(nth(&ws(&["ab", "ac"]), -1), None);
        assert_eq!(write(&ws(&["a", "b"]), 5, &word("u")), ws(&["a", "b"]));
        assert_eq!(write(&ws(&["a", "b"]), 1, &word("u")), ws(&["a", "u"]));
        assert_eq!(subseq(&ws(&["a", "b", "c"]), 1, 5), Some(ws(&["b", "c"])));
        assert_eq!(subseq(&ws(&["a", "b", "c"]), 1, 0), Some(vec![]));
        assert_eq!(subseq(&ws(&["a", "b", "c"]), 3, 1), None);
        assert_eq!(subseq(&ws(&["a", "b", "c"]), 0, -1), None);
        assert_eq!(split(&re("b"), &word("aaa")), ws(&["aaa"]));
    }

    #[test]
    fn string_level() {
        assert_eq!(elem_str(&sep_word("†ab†ac†"), 1), Some(word("ab")));
        assert_eq!(filter_str(&re("a*b"), &sep_word("†ab†ac†aab†")), Some(sep_word("†ab†aab†")));
        assert_eq!(seqlen_str(&sep_word("†a††")), 3);
        assert_eq!(write_str(&sep_word("†a†b†"), 2, &word("c")), Some(sep_word("†a†c†")));
        assert_eq!(subseq_str(&sep_word("†a†b†c†"), 2, 1), Some(sep_word("†b†")));
    }

    #[test]
    fn model_checking() {
        let s = parse_script(
            "(declare-fun s0 () (Seq String))(declare-fun s1 () (Seq String))
             (assert (= s1 (seq.++ s0 (seq.++ (seq.unit \"u\") (seq.unit \"v\")))))
             (assert (< (seq.len s1) 2))",
        )
        .unwrap();
        for n in 0..3 {
            let s0: Vec<Word> = vec![word("a"); n];
            let mut s1 = s0.clone();
            s1.extend(ws(&["u", "v"]));
            let m: Assignment = [("s0".to_string(), Value::Seq(s0)), ("s1".to_string(), Value::Seq(s1))].into();
            assert!(!check_model(&s, &m));
        }
        let t = parse_script("(declare-fun x () String)(assert (= x \"a\"))(assert (str.in_re x (re.* (str.to_re \"a\"))))")
            .unwrap();
        let m: Assignment = [("x".to_string(), Value::Str(word("a")))].into();
        assert!(check_model(&t, &m));
        let bad: Assignment = [("x".to_string(), Value::Int(1))].into();
        assert!(!check_model(&t, &bad));
    }
}
