use super::nfa::Nfa;
use crate::alphabet::Universe;
use crate::regex::Regex;

/// Builds an epsilon-free NFA recognising `L(e)`. Complement is taken over
/// the user alphabet.
pub fn compile_regex(e: &Regex) -> Nfa {
    build(e).trim()
}

fn build(e: &Regex) -> Nfa {
    match e {
        Regex::Empty => Nfa::empty(),
        Regex::Epsilon => Nfa::word(&[]),
        Regex::Range(l, h) => {
            let mut a = Nfa::new();
            let s = a.add_state(false);
            let t = a.add_state(true);
            a.initial.push(s);
            a.add_trans(s, *l, *h, t);
            a
        }
        Regex::Union(x, y) => build(x).union(&build(y)),
        Regex::Concat(x, y) => concat(&build(x), &build(y)),
        Regex::Star(x) => star(&build(x).trim()),
        Regex::Complement(x) => build(x).complement(Universe::Sigma).trim(),
    }
}

/// Epsilon-free concatenation: every final state of `a` inherits the outgoing
/// transitions of the initial states of `b`.
pub fn concat(a: &Nfa, b: &Nfa) -> Nfa {
    let mut out = Nfa::new();
    let b_nullable = b.initial.iter().any(|&i| b.finals[i]);
    for s in 0..a.num_states() {
        out.add_state(a.finals[s] && b_nullable);
    }
    let off = a.num_states();
    for s in 0..b.num_states() {
        out.add_state(b.finals[s]);
    }
    for s in 0..a.num_states() {
        for &(l, h, d) in &a.trans[s] {
            out.add_trans(s, l, h, d);
        }
        if a.finals[s] {
            for &i in &b.initial {
                for &(l, h, d) in &b.trans[i] {
                    out.add_trans(s, l, h, d + off);
                }
            }
        }
    }
    for s in 0..b.num_states() {
        for &(l, h, d) in &b.trans[s] {
            out.add_trans(s + off, l, h, d + off);
        }
    }
    out.initial = a.initial.clone();
    out
}

fn star(a: &Nfa) -> Nfa {
    let mut out = a.clone();
    let s0 = out.add_state(true);
    let init_edges: Vec<_> = a
        .initial
        .iter()
        .flat_map(|&i| a.trans[i].iter().copied())
        .collect();
    for &(l, h, d) in &init_edges {
        out.add_trans(s0, l, h, d);
    }
    for f in 0..a.num_states() {
        if a.finals[f] {
            for &(l, h, d) in &init_edges {
                out.add_trans(f, l, h, d);
            }
        }
    }
    out.initial = vec![s0];
    out
}
