//! Regex matching by Brzozowski derivatives. Deliberately independent of the
//! automata code so it can serve as an oracle for it.

use crate::alphabet::Sym;
use crate::regex::Regex;
use std::collections::BTreeSet;

fn union(a: Regex, b: Regex) -> Regex {
    let mut parts = BTreeSet::new();
    for r in [a, b] {
        collect_union(r, &mut parts);
    }
    parts.remove(&Regex::Empty);
    let mut it = parts.into_iter().rev();
    let Some(mut acc) = it.next() else {
        return Regex::Empty;
    };
    for r in it {
        acc = Regex::union(r, acc);
    }
    acc
}

fn collect_union(r: Regex, out: &mut BTreeSet<Regex>) {
    match r {
        Regex::Union(a, b) => {
            collect_union(*a, out);
            collect_union(*b, out);
        }
        other => {
            out.insert(other);
        }
    }
}

fn concat(a: Regex, b: Regex) -> Regex {
    match (a, b) {
        (Regex::Empty, _) | (_, Regex::Empty) => Regex::Empty,
        (Regex::Epsilon, r) | (r, Regex::Epsilon) => r,
        (Regex::Concat(x, y), r) => concat(*x, concat(*y, r)),
        (a, b) => Regex::concat(a, b),
    }
}

fn complement(a: Regex) -> Regex {
    match a {
        Regex::Complement(x) => *x,
        other => Regex::complement(other),
    }
}

pub fn derivative(r: &Regex, c: Sym) -> Regex {
    match r {
        Regex::Empty | Regex::Epsilon => Regex::Empty,
        Regex::Range(l, h) => {
            if *l <= c && c <= *h {
                Regex::Epsilon
            } else {
                Regex::Empty
            }
        }
        Regex::Union(a, b) => union(derivative(a, c), derivative(b, c)),
        Regex::Concat(a, b) => {
            let left = concat(derivative(a, c), (**b).clone());
            if a.nullable() {
                union(left, derivative(b, c))
            } else {
                left
            }
        }
        Regex::Star(a) => concat(derivative(a, c), r.clone()),
        Regex::Complement(a) => complement(derivative(a, c)),
    }
}

pub fn regex_matches(r: &Regex, w: &[Sym]) -> bool {
    let mut d = r.clone();
    for &c in w {
        d = derivative(&d, c);
        if d == Regex::Empty {
            return false;
        }
    }
    d.nullable()
}

/// End of the longest match of `r` starting at `start`.
pub fn longest_match_at(r: &Regex, w: &[Sym], start: usize) -> Option<usize> {
    let mut d = r.clone();
    let mut best = if d.nullable() { Some(start) } else { None };
    for (i, &c) in w.iter().enumerate().skip(start) {
        d = derivative(&d, c);
        if d == Regex::Empty {
            break;
        }
        if d.nullable() {
            best = Some(i + 1);
        }
    }
    best
}

/// Leftmost-longest match spans. After an empty match the scan resumes one
/// position later; an empty match at the end of input is reported when `r`
/// is nullable.
pub fn match_spans(r: &Regex, w: &[Sym]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos <= w.len() {
        let found = (pos..=w.len()).find_map(|s| longest_match_at(r, w, s).map(|e| (s, e)));
        let Some((s, e)) = found else { break };
        out.push((s, e));
        pos = if e > s { e } else { s + 1 };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::word;
    use crate::regex::{parse_regex, Dialect};

    fn re(s: &str) -> Regex {
        parse_regex(s, Dialect::Classic).unwrap()
    }

    #[test]
    fn membership() {
        assert!(regex_matches(&re("a*b"), &word("aab")));
        assert!(!regex_matches(&re("a*b"), &word("ac")));
        assert!(regex_matches(&re("~(a*)"), &word("ab")));
        assert!(!regex_matches(&re("~(a*)"), &word("aa")));
        assert!(regex_matches(&re("[0-9]+(\\.[0-9]*)?"), &word("12.5623")));
    }

    #[test]
    fn spans() {
        assert_eq!(match_spans(&re("a+"), &word("baab")), vec![(1, 3)]);
        // same as Python re.finditer('a*', 'baab')
        assert_eq!(match_spans(&re("a*"), &word("baab")), vec![(0, 0), (1, 3), (3, 3), (4, 4)]);
        assert_eq!(match_spans(&re("a*"), &word("aab")), vec![(0, 2), (2, 2), (3, 3)]);
        assert_eq!(match_spans(&re("ab|a"), &word("aab")), vec![(0, 1), (1, 3)]);
    }
}
