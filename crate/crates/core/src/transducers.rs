//! Transducers for filter, matchAll, replaceAll, split and join on encoded
//! sequences.
//!
//! The matching transducers share one construction. A run scans the input
//! left to right in one of two modes: `Scan` (outside a match) or `Match`.
//! The regex is compiled to a trimmed minimal DFA `D`, and every state
//! carries a set `pend` of `D`-states that must never reach a final state
//! again. Positions skipped in `Scan` and finished matches add to `pend`,
//! which rules out runs that are not leftmost or not longest; the accepted
//! run is therefore unique.

use crate::alphabet::{Sym, Word, MAX_CHAR, SEP};
use crate::automata::{compile_regex, lit_output, split_ranges, Nft, OutItem, Output, State};
use crate::interp;
use crate::regex::Regex;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

/// What a leftmost-longest transducer emits.
struct Emit {
    prefix: Word,
    unmatched: Output,
    start: Word,
    inside: Output,
    end: Word,
    suffix: Word,
}

struct Dfa {
    init: Option<State>,
    finals: Vec<bool>,
    trans: Vec<Vec<(Sym, Sym, State)>>,
}

impl Dfa {
    fn new(e: &Regex) -> Dfa {
        let d = compile_regex(e).minimize();
        Dfa {
            init: d.initial.first().copied().filter(|_| d.finals.iter().any(|&f| f)),
            finals: d.finals.clone(),
            trans: d.trans.clone(),
        }
    }

    fn step(&self, q: State, c: Sym) -> Option<State> {
        self.trans[q]
            .iter()
            .find(|&&(l, h, _)| l <= c && c <= h)
            .map(|&(_, _, d)| d)
    }

    fn step_set(&self, qs: &BTreeSet<State>, c: Sym) -> BTreeSet<State> {
        qs.iter().filter_map(|&q| self.step(q, c)).collect()
    }

    fn any_final(&self, qs: &BTreeSet<State>) -> bool {
        qs.iter().any(|&q| self.finals[q])
    }

    /// Ranges over the user alphabet on which every state behaves uniformly.
    fn minterms(&self) -> Vec<(Sym, Sym)> {
        let mut all: Vec<(Sym, Sym)> = vec![(0, MAX_CHAR)];
        for ts in &self.trans {
            all.extend(ts.iter().map(|&(l, h, _)| (l, h)));
        }
        split_ranges(all)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Mode {
    Scan,
    Match(State),
}

fn concat_out(parts: &[&[OutItem]]) -> Output {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn leftmost_longest(e: &Regex, emit: Emit) -> Nft {
    let d = Dfa::new(e);
    let nullable = e.nullable();
    let minterms = d.minterms();
    let empty_match: Output = if nullable {
        lit_output(&[emit.start.clone(), emit.end.clone()].concat())
    } else {
        Vec::new()
    };
    let start = lit_output(&emit.start);
    let end = lit_output(&emit.end);

    let mut nft = Nft::new();
    let q0 = nft.add_state(false);
    let qf = nft.add_state(true);
    nft.initial.push(q0);
    type Key = (Mode, BTreeSet<State>);
    let mut index: HashMap<Key, State> = HashMap::new();
    let mut queue: VecDeque<(Key, State)> = VecDeque::new();
    let get = |nft: &mut Nft, index: &mut HashMap<Key, State>, queue: &mut VecDeque<(Key, State)>, key: Key| {
        *index.entry(key.clone()).or_insert_with(|| {
            let s = nft.add_state(false);
            queue.push_back((key, s));
            s
        })
    };
    let s0 = get(&mut nft, &mut index, &mut queue, (Mode::Scan, BTreeSet::new()));
    nft.add_eps(q0, s0, lit_output(&emit.prefix));
    while let Some(((mode, pend), src)) = queue.pop_front() {
        match mode {
            Mode::Scan => {
                let mut fin = empty_match.clone();
                fin.extend(lit_output(&emit.suffix));
                nft.add_eps(src, qf, fin);
                for &(lo, hi) in &minterms {
                    // no nonempty match starts here
                    let mut with_init = pend.clone();
                    with_init.extend(d.init);
                    let np = d.step_set(&with_init, lo);
                    if !d.any_final(&np) {
                        let out = concat_out(&[&empty_match, &emit.unmatched]);
                        let dst = get(&mut nft, &mut index, &mut queue, (Mode::Scan, np));
                        nft.add(src, lo, hi, dst, out);
                    }
                    // a nonempty match starts here
                    let Some(c1) = d.init.and_then(|i| d.step(i, lo)) else { continue };
                    let np = d.step_set(&pend, lo);
                    if d.any_final(&np) {
                        continue;
                    }
                    let out = concat_out(&[&start, &emit.inside]);
                    let dst = get(&mut nft, &mut index, &mut queue, (Mode::Match(c1), np.clone()));
                    nft.add(src, lo, hi, dst, out.clone());
                    if d.finals[c1] {
                        let mut merged = np;
                        merged.insert(c1);
                        let dst = get(&mut nft, &mut index, &mut queue, (Mode::Scan, merged));
                        nft.add(src, lo, hi, dst, concat_out(&[&out, &end]));
                    }
                }
            }
            Mode::Match(cur) => {
                for &(lo, hi) in &minterms {
                    let Some(c) = d.step(cur, lo) else { continue };
                    let np = d.step_set(&pend, lo);
                    if d.any_final(&np) {
                        continue;
                    }
                    let dst = get(&mut nft, &mut index, &mut queue, (Mode::Match(c), np.clone()));
                    nft.add(src, lo, hi, dst, emit.inside.clone());
                    if d.finals[c] {
                        let mut merged = np;
                        merged.insert(c);
                        let dst = get(&mut nft, &mut index, &mut queue, (Mode::Scan, merged));
                        nft.add(src, lo, hi, dst, concat_out(&[&emit.inside, &end]));
                    }
                }
            }
        }
    }
    nft
}

/// `"†" v1 "†" ... vk "†"` for the leftmost-longest matches `v1..vk`.
pub fn match_all_nft(e: &Regex) -> Nft {
    leftmost_longest(
        e,
        Emit {
            prefix: vec![SEP],
            unmatched: Vec::new(),
            start: Vec::new(),
            inside: vec![OutItem::Copy],
            end: vec![SEP],
            suffix: Vec::new(),
        },
    )
}

/// Replaces every leftmost-longest match by `rep`.
pub fn replace_all_nft(e: &Regex, rep: &[Sym]) -> Nft {
    leftmost_longest(
        e,
        Emit {
            prefix: Vec::new(),
            unmatched: vec![OutItem::Copy],
            start: rep.to_vec(),
            inside: Vec::new(),
            end: Vec::new(),
            suffix: Vec::new(),
        },
    )
}

/// `"†" . replaceAll(u, "†") . "†"`
pub fn splitstr_nft(e: &Regex) -> Nft {
    leftmost_longest(
        e,
        Emit {
            prefix: vec![SEP],
            unmatched: vec![OutItem::Copy],
            start: vec![SEP],
            inside: Vec::new(),
            end: Vec::new(),
            suffix: vec![SEP],
        },
    )
}

/// Keeps the elements of an encoded sequence that match `e`.
pub fn filter_nft(e: &Regex) -> Nft {
    use crate::alphabet::Universe;
    let d = compile_regex(e).determinize(Some(Universe::Sigma));
    let n = d.num_states();
    let init = d.initial[0];
    let mut nft = Nft::new();
    let qn = nft.add_state(false);
    let qb = nft.add_state(true);
    // keep copy: states 2..2+n, drop copy: 2+n..2+2n
    for _ in 0..2 * n {
        nft.add_state(false);
    }
    let keep = |q: State| 2 + q;
    let drop = |q: State| 2 + n + q;
    nft.initial.push(qn);
    nft.add(qn, SEP, SEP, qb, vec![OutItem::Lit(SEP)]);
    // an element that is empty
    if d.finals[init] {
        nft.add(qb, SEP, SEP, qb, vec![OutItem::Lit(SEP)]);
    } else {
        nft.add(qb, SEP, SEP, qb, Vec::new());
    }
    for &(l, h, t) in &d.trans[init] {
        nft.add(qb, l, h, keep(t), vec![OutItem::Copy]);
        nft.add(qb, l, h, drop(t), Vec::new());
    }
    for q in 0..n {
        for &(l, h, t) in &d.trans[q] {
            nft.add(keep(q), l, h, keep(t), vec![OutItem::Copy]);
            nft.add(drop(q), l, h, drop(t), Vec::new());
        }
        if d.finals[q] {
            nft.add(keep(q), SEP, SEP, qb, vec![OutItem::Lit(SEP)]);
        } else {
            nft.add(drop(q), SEP, SEP, qb, Vec::new());
        }
    }
    nft
}

/// Joins the elements of an encoded sequence with `u`.
pub fn join_nft(u: &[Sym]) -> Nft {
    let mut nft = Nft::new();
    let s0 = nft.add_state(false);
    let s1 = nft.add_state(true);
    let inside = nft.add_state(false);
    let after = nft.add_state(false);
    let done = nft.add_state(true);
    nft.initial.push(s0);
    nft.add(s0, SEP, SEP, s1, Vec::new());
    for s in [s1, inside, after] {
        nft.add(s, 0, MAX_CHAR, inside, vec![OutItem::Copy]);
        nft.add(s, SEP, SEP, done, Vec::new());
        nft.add(s, SEP, SEP, after, lit_output(u));
    }
    nft
}

/// A string function realised by a transducer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Transducer {
    Filter(Regex),
    SplitStr(Regex),
    MatchAllStr(Regex),
    Join(Word),
    ReplaceAll(Regex, Word),
}

impl Transducer {
    pub fn nft(&self) -> Nft {
        match self {
            Transducer::Filter(e) => filter_nft(e),
            Transducer::SplitStr(e) => splitstr_nft(e),
            Transducer::MatchAllStr(e) => match_all_nft(e),
            Transducer::Join(u) => join_nft(u),
            Transducer::ReplaceAll(e, u) => replace_all_nft(e, u),
        }
    }

    /// Reference semantics; `None` on inputs outside the domain.
    pub fn apply(&self, w: &[Sym]) -> Option<Word> {
        match self {
            Transducer::Filter(e) => interp::filter_str(e, w),
            Transducer::SplitStr(e) => interp::splitstr(e, w),
            Transducer::MatchAllStr(e) => interp::matchallstr(e, w),
            Transducer::Join(u) => interp::join_str(u, w),
            Transducer::ReplaceAll(e, u) => {
                if w.contains(&SEP) {
                    return None;
                }
                let mut out = Vec::new();
                let mut prev = 0;
                for (s, t) in interp::match_spans(e, w) {
                    out.extend_from_slice(&w[prev..s]);
                    out.extend_from_slice(u);
                    prev = t;
                }
                out.extend_from_slice(&w[prev..]);
                Some(out)
            }
        }
    }

    /// True when the input is an encoded sequence.
    pub fn seq_input(&self) -> bool {
        matches!(self, Transducer::Filter(_) | Transducer::Join(_))
    }

    /// True when the output is an encoded sequence.
    pub fn seq_output(&self) -> bool {
        matches!(
            self,
            Transducer::Filter(_) | Transducer::SplitStr(_) | Transducer::MatchAllStr(_)
        )
    }
}

impl fmt::Display for Transducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transducer::Filter(e) => write!(f, "filter[{e}]"),
            Transducer::SplitStr(e) => write!(f, "splitstr[{e}]"),
            Transducer::MatchAllStr(e) => write!(f, "matchallstr[{e}]"),
            Transducer::Join(u) => write!(f, "join[{}]", crate::alphabet::show_word(u)),
            Transducer::ReplaceAll(e, u) => write!(f, "replaceall[{e}, {}]", crate::alphabet::show_word(u)),
        }
    }
}
