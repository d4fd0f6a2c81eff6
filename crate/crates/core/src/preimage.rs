//! Pre-images of CEFA languages under the string operations produced by
//! the encoding.
//!
//! Each pre-image is a list of alternatives. An alternative constrains every
//! string argument by a CEFA and relates the registers of the original
//! automaton to those of the argument automata by an LIA formula, which
//! also binds index arguments to fresh counting registers.

use crate::alphabet::{Sym, Universe, MAX_CHAR, SEP};
use crate::automata::{EpsFreeNft, OutItem, State};
use crate::cefa::{add_vec, fresh_name, Cefa, CefaError};
use crate::encode::format_automata;
use crate::lia::{LiaFormula, LinExpr, Rel};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

#[derive(Clone, Debug)]
pub struct PreimageAlternative {
    /// One automaton per string argument, in argument order.
    pub args: Vec<Cefa>,
    pub constraint: LiaFormula,
}

impl PreimageAlternative {
    pub fn size(&self) -> usize {
        self.args.iter().map(Cefa::size).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.constraint == LiaFormula::False || self.args.iter().any(Cefa::is_empty)
    }
}

/// Counts every symbol.
pub fn strlen_cefa(register: String) -> Cefa {
    Cefa::counter(register, Universe::SigmaSep, &[(0, SEP)])
}

/// Counts separators.
pub fn seqlen_cefa(register: String) -> Cefa {
    Cefa::counter(register, Universe::SigmaSep, &[(SEP, SEP)])
}

fn a0() -> Cefa {
    Cefa::from_nfa(&format_automata().0)
}

fn a1() -> Cefa {
    Cefa::from_nfa(&format_automata().1)
}

fn var(r: &str) -> LinExpr {
    LinExpr::var(r.to_string())
}

/// `r = r1 + r2` for each register of `a`.
fn sum_constraint(a: &Cefa, m1: &BTreeMap<String, String>, m2: &BTreeMap<String, String>) -> LiaFormula {
    LiaFormula::and(
        a.registers
            .iter()
            .map(|r| LiaFormula::eq(var(r), var(&m1[r]).add(&var(&m2[r]))))
            .collect(),
    )
}

/// `r = c` for each register of `a`.
fn const_constraint(a: &Cefa, c: &[i64]) -> LiaFormula {
    LiaFormula::and(
        a.registers
            .iter()
            .zip(c)
            .map(|(r, &v)| LiaFormula::eq(var(r), LinExpr::constant(v)))
            .collect(),
    )
}

fn fresh_map(a: &Cefa) -> BTreeMap<String, String> {
    a.registers.iter().map(|r| (r.clone(), fresh_name("r"))).collect()
}

fn renamed(a: &Cefa, m: &BTreeMap<String, String>) -> Cefa {
    a.rename_registers(m).expect("fresh names are injective")
}

/// Accepts only the empty word; no registers.
fn epsilon_cefa() -> Cefa {
    let mut c = Cefa::new(Vec::new());
    let s = c.add_state(true);
    c.initial.push(s);
    c
}

fn with_zeros(v: &[i64], extra: &[i64]) -> Vec<i64> {
    let mut out = v.to_vec();
    out.extend_from_slice(extra);
    out
}

fn zeros(k: usize) -> Vec<i64> {
    vec![0; k]
}

/// Largest constant index that is unfolded into states.
const MAX_UNFOLDED_INDEX: i64 = 64;

fn constant_index(e: &LinExpr) -> Option<i64> {
    (e.is_constant() && e.constant <= MAX_UNFOLDED_INDEX).then_some(e.constant)
}

/// Binds register `reg` of `c` to `index`. Small constant indices are
/// counted in the states so that no register is left behind; products of
/// such automata then stay synchronised on the separators.
fn bind_index(c: Cefa, reg: &str, index: &LinExpr) -> (Cefa, LiaFormula) {
    if let Some(v) = constant_index(index) {
        if let Some(fixed) = c.fix_register(reg, v) {
            return (fixed, LiaFormula::True);
        }
    }
    (c, LiaFormula::eq(var(reg), index.clone()))
}

/// Words with at most `c` separators; no registers.
fn at_most_seps(c: i64) -> Cefa {
    let mut b = Cefa::new(Vec::new());
    let n = c.max(0) as usize;
    for i in 0..=n {
        b.add_state(true);
        b.add_trans(i, 0, MAX_CHAR, i, Vec::new());
        if i > 0 {
            b.add_trans(i - 1, SEP, SEP, i, Vec::new());
        }
    }
    b.initial = vec![0];
    b
}

/// Splits a transition range into its user-symbol part and the separator.
fn split_sep(lo: Sym, hi: Sym) -> (Option<(Sym, Sym)>, bool) {
    let sigma = if lo <= MAX_CHAR { Some((lo, hi.min(MAX_CHAR))) } else { None };
    (sigma, hi >= SEP)
}

/// `x = y . z`: one alternative per state `m` where the run on `x` crosses
/// from `y` to `z`.
pub fn pre_concat(a: &Cefa) -> Vec<PreimageAlternative> {
    let a = a.trim();
    let (m1, m2) = (fresh_map(&a), fresh_map(&a));
    let (c1, c2) = (renamed(&a, &m1), renamed(&a, &m2));
    let constraint = sum_constraint(&a, &m1, &m2);
    let mut out = Vec::new();
    for m in 0..a.num_states() {
        let mut left = c1.clone();
        left.finals = vec![false; a.num_states()];
        left.finals[m] = true;
        let mut right = c2.clone();
        right.initial = vec![m];
        let (left, right) = (left.trim(), right.trim());
        if left.is_empty() || right.is_empty() {
            continue;
        }
        out.push(PreimageAlternative {
            args: vec![left, right],
            constraint: constraint.clone(),
        });
    }
    out
}

/// `x = y ++ z` on encodings: `x` is `y` without its last separator,
/// followed by `z`.
pub fn pre_seqconcat(a: &Cefa) -> Vec<PreimageAlternative> {
    let a = a.trim();
    let (m1, m2) = (fresh_map(&a), fresh_map(&a));
    let (c1, c2) = (renamed(&a, &m1), renamed(&a, &m2));
    let constraint = sum_constraint(&a, &m1, &m2);
    let (fmt0, k) = (a0(), a.k());
    let mut out = Vec::new();
    for m in 0..a.num_states() {
        // y = w† where the run of `a` on w ends in m
        let mut left = c1.clone();
        left.finals = vec![false; a.num_states()];
        let f = left.add_state(true);
        left.add_trans(m, SEP, SEP, f, zeros(k));
        let mut right = c2.clone();
        right.initial = vec![m];
        let left = left.product(&fmt0).expect("format automaton has no registers");
        let right = right.product(&fmt0).expect("format automaton has no registers");
        if left.is_empty() || right.is_empty() {
            continue;
        }
        out.push(PreimageAlternative {
            args: vec![left, right],
            constraint: constraint.clone(),
        });
    }
    out
}

/// Runs `a` from `q` over the output `out` produced while reading some
/// symbol of `[lo, hi]`. Copy items narrow the symbol range. Returns the
/// reachable `(state, cost, lo, hi)`.
fn run_output(
    a: &Cefa,
    q: State,
    out: &[OutItem],
    lo: Sym,
    hi: Sym,
) -> Result<BTreeSet<(State, Vec<i64>, Sym, Sym)>, CefaError> {
    let mut cur: BTreeSet<(State, Vec<i64>, Sym, Sym)> = BTreeSet::new();
    cur.insert((q, zeros(a.k()), lo, hi));
    for item in out {
        let mut next = BTreeSet::new();
        for (s, c, l, h) in &cur {
            for t in &a.trans[*s] {
                let (nl, nh) = match item {
                    OutItem::Lit(x) => {
                        if t.lo <= *x && *x <= t.hi {
                            (*l, *h)
                        } else {
                            continue;
                        }
                    }
                    OutItem::Copy => (t.lo.max(*l), t.hi.min(*h)),
                };
                if nl > nh {
                    continue;
                }
                next.insert((t.dst, add_vec(c, &t.upd)?, nl, nh));
            }
        }
        cur = next;
        if cur.is_empty() {
            break;
        }
    }
    Ok(cur)
}

/// Costs of runs of `a` from `q` over `w` that end in a final state.
fn run_word_to_final(a: &Cefa, q: State, w: &[Sym]) -> Result<BTreeSet<Vec<i64>>, CefaError> {
    let out: Vec<OutItem> = w.iter().map(|&c| OutItem::Lit(c)).collect();
    Ok(run_output(a, q, &out, 0, 0)?
        .into_iter()
        .filter(|(s, ..)| a.finals[*s])
        .map(|(_, c, ..)| c)
        .collect())
}

/// `y = T(x)`: the automaton reading `x` while `a` reads the output of `T`.
/// The registers of `a` are kept. Outputs on the empty input are handled by
/// separate alternatives that fix the register values.
pub fn pre_nft(t: &EpsFreeNft, a: &Cefa) -> Result<Vec<PreimageAlternative>, CefaError> {
    let a = a.trim();
    let k = a.k();
    let mut b = Cefa::new(a.registers.clone());
    let acc = b.add_state(true);
    let mut index: HashMap<(State, State), State> = HashMap::new();
    let mut queue = VecDeque::new();
    for &p in &t.initial {
        for &q in &a.initial {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry((p, q)) {
                let s = b.add_state(false);
                e.insert(s);
                b.initial.push(s);
                queue.push_back((p, q));
            }
        }
    }
    let mut finishing: HashMap<(State, State), BTreeSet<Vec<i64>>> = HashMap::new();
    while let Some((p, q)) = queue.pop_front() {
        let src = index[&(p, q)];
        for (lo, hi, p2, out) in &t.trans[p] {
            for (q2, c, l, h) in run_output(&a, q, out, *lo, *hi)? {
                let dst = match index.get(&(*p2, q2)) {
                    Some(&d) => d,
                    None => {
                        let d = b.add_state(false);
                        index.insert((*p2, q2), d);
                        queue.push_back((*p2, q2));
                        d
                    }
                };
                b.add_trans(src, l, h, dst, c.clone());
                if !t.is_final(*p2) {
                    continue;
                }
                if !finishing.contains_key(&(*p2, q2)) {
                    let mut costs = BTreeSet::new();
                    for w in &t.final_outputs[*p2] {
                        costs.extend(run_word_to_final(&a, q2, w)?);
                    }
                    finishing.insert((*p2, q2), costs);
                }
                for c2 in &finishing[&(*p2, q2)] {
                    b.add_trans(src, l, h, acc, add_vec(&c, c2)?);
                }
            }
        }
    }
    let mut out = Vec::new();
    let b = b.trim();
    if !b.is_empty() {
        out.push(PreimageAlternative {
            args: vec![b],
            constraint: LiaFormula::True,
        });
    }
    let mut empty_costs = BTreeSet::new();
    for w in t.empty_outputs() {
        empty_costs.extend(a.accepts_with_cost(&w)?);
    }
    for c in empty_costs {
        out.push(PreimageAlternative {
            args: vec![epsilon_cefa()],
            constraint: const_constraint(&a, &c),
        });
    }
    debug_assert!(out.iter().all(|alt| alt.args.len() == 1 && k == a.k()));
    Ok(out)
}

/// For each state, whether some separator transition enters it and whether
/// some separator transition leaves it.
fn sep_neighbours(a: &Cefa) -> (Vec<bool>, Vec<bool>) {
    let n = a.num_states();
    let (mut into, mut out) = (vec![false; n], vec![false; n]);
    for s in 0..n {
        for t in &a.trans[s] {
            if t.hi >= SEP {
                into[t.dst] = true;
                out[s] = true;
            }
        }
    }
    (into, out)
}

/// States reachable from `p` without reading a separator.
fn sigma_reachable_from(a: &Cefa, p: State) -> Vec<bool> {
    let mut seen = vec![false; a.num_states()];
    seen[p] = true;
    let mut stack = vec![p];
    while let Some(s) = stack.pop() {
        for t in &a.trans[s] {
            if t.lo <= MAX_CHAR && !seen[t.dst] {
                seen[t.dst] = true;
                stack.push(t.dst);
            }
        }
    }
    seen
}

/// States entered by the `c`-th separator of some run.
fn entered_by_sep(a: &Cefa, c: i64) -> Vec<bool> {
    let mut hit = vec![false; a.num_states()];
    if c < 1 {
        return hit;
    }
    let mut seen: BTreeSet<(State, i64)> = a.initial.iter().map(|&s| (s, 0)).collect();
    let mut stack: Vec<(State, i64)> = seen.iter().copied().collect();
    while let Some((s, n)) = stack.pop() {
        for t in &a.trans[s] {
            let (sigma, sep) = split_sep(t.lo, t.hi);
            let mut next = Vec::new();
            if sigma.is_some() {
                next.push(n);
            }
            if sep && n + 1 <= c {
                if n + 1 == c {
                    hit[t.dst] = true;
                }
                next.push(n + 1);
            }
            for m in next {
                if seen.insert((t.dst, m)) {
                    stack.push((t.dst, m));
                }
            }
        }
    }
    hit
}

/// Adds the transitions of `a` from `src` to `map(dst)`, appending `extra`
/// to every update and `extra_sep` instead on the separator.
fn copy_trans(b: &mut Cefa, a: &Cefa, s: State, src: State, map: &dyn Fn(State) -> State, extra: &[i64], extra_sep: &[i64]) {
    for t in &a.trans[s] {
        let (sigma, sep) = split_sep(t.lo, t.hi);
        if let Some((l, h)) = sigma {
            b.add_trans(src, l, h, map(t.dst), with_zeros(&t.upd, extra));
        }
        if sep {
            b.add_trans(src, SEP, SEP, map(t.dst), with_zeros(&t.upd, extra_sep));
        }
    }
}

/// The `write` automaton for the pause state `p` and resume state `q`:
/// registers are those of `a` followed by the index register.
fn write_automaton(a: &Cefa, p: State, q: State) -> Cefa {
    let n = a.num_states();
    let k = a.k();
    let mut regs = a.registers.clone();
    regs.push(String::new());
    let mut b = Cefa::new(regs);
    // pre: 0..n, idle: n, post: n+1..2n+1
    for _ in 0..n {
        b.add_state(false);
    }
    let idle = b.add_state(false);
    for s in 0..n {
        b.add_state(a.finals[s]);
    }
    let post = |s: State| n + 1 + s;
    b.initial = a.initial.clone();
    for s in 0..n {
        copy_trans(&mut b, a, s, s, &|d| d, &[0], &[1]);
        for t in &a.trans[s] {
            if t.hi >= SEP && t.dst == p {
                b.add_trans(s, SEP, SEP, idle, with_zeros(&t.upd, &[1]));
            }
        }
        copy_trans(&mut b, a, s, post(s), &post, &[0], &[0]);
    }
    b.add_trans(idle, 0, MAX_CHAR, idle, zeros(k + 1));
    for t in &a.trans[q] {
        if t.hi >= SEP {
            b.add_trans(idle, SEP, SEP, post(t.dst), with_zeros(&t.upd, &[0]));
        }
    }
    b
}

/// Candidate `(p, q)` splits of a run of `a` at a replaced element: a
/// separator enters `p`, one leaves `q`, and `q` is reachable from `p`
/// without reading a separator. For a constant index, `p` must also be
/// entered by the separator of that number.
pub fn write_pairs(a: &Cefa, index: &LinExpr) -> Vec<(State, State)> {
    let (into, from) = sep_neighbours(a);
    let candidates = match constant_index(index) {
        Some(c) => entered_by_sep(a, c),
        None => into,
    };
    let mut out = Vec::new();
    for p in (0..a.num_states()).filter(|&p| candidates[p]) {
        let reach = sigma_reachable_from(a, p);
        out.extend((0..a.num_states()).filter(|&q| from[q] && reach[q]).map(|q| (p, q)));
    }
    out
}

/// `z = write(x, k, y)`. In-range alternatives split `a`'s run at the
/// replaced element; the last alternative covers out-of-range indices,
/// where `z = x`.
pub fn pre_write(a: &Cefa, index: &LinExpr) -> Vec<PreimageAlternative> {
    let a = a.trim();
    let fmt0 = a0();
    let fmt1 = a1();
    let (m1, m2) = (fresh_map(&a), fresh_map(&a));
    let rk = fresh_name("k");
    let mut m1k = m1.clone();
    m1k.insert(String::new(), rk.clone());
    let sum = sum_constraint(&a, &m1, &m2);
    let a2 = renamed(&a, &m2);
    let mut out = Vec::new();
    for (p, q) in write_pairs(&a, index) {
        let y = a2
            .sub_automaton(p, q)
            .expect("states are in range")
            .product(&fmt1)
            .expect("format automaton has no registers");
        if y.is_empty() {
            continue;
        }
        let (x, binding) = bind_index(renamed(&write_automaton(&a, p, q), &m1k), &rk, index);
        let x = x.product(&fmt0).expect("format automaton has no registers");
        if x.is_empty() {
            continue;
        }
        out.push(PreimageAlternative {
            args: vec![x, y],
            constraint: LiaFormula::and(vec![sum.clone(), binding]),
        });
    }
    // out of range: the result is x itself
    let (x, constraint) = match constant_index(index) {
        Some(c) if c <= 0 => (a.clone(), LiaFormula::True),
        Some(c) => (a.product(&at_most_seps(c)).expect("no registers"), LiaFormula::True),
        None => {
            let rc = fresh_name("c");
            let x = a.product(&seqlen_cefa(rc.clone())).expect("fresh register");
            let constraint = LiaFormula::or(vec![
                LiaFormula::le(index.clone(), LinExpr::constant(0)),
                LiaFormula::cmp(index.clone(), Rel::Ge, var(&rc)),
            ]);
            (x, constraint)
        }
    };
    let x = x.product(&fmt0).expect("format automaton has no registers");
    if !x.is_empty() {
        out.push(PreimageAlternative {
            args: vec![x, fmt1],
            constraint,
        });
    }
    out
}

/// The shape of the automaton for `subseq`.
#[derive(Clone, Copy, PartialEq, Eq)]
enum SubseqShape {
    /// Anything may follow the selected segment.
    Exact,
    /// The segment ends at the last separator.
    ToEnd,
}

/// Registers: those of `a`, then the start and length counters.
fn subseq_automaton(a: &Cefa, shape: SubseqShape) -> Cefa {
    let n = a.num_states();
    let k = a.k();
    let mut regs = a.registers.clone();
    regs.push("#start".to_string());
    regs.push("#len".to_string());
    let mut b = Cefa::new(regs);
    for _ in 0..n {
        b.add_state(false);
    }
    let pre = b.add_state(false);
    let post = b.add_state(true);
    b.initial = vec![pre];
    b.add_trans(pre, 0, MAX_CHAR, pre, zeros(k + 2));
    b.add_trans(pre, SEP, SEP, pre, with_zeros(&zeros(k), &[1, 0]));
    for &i in &a.initial {
        for t in &a.trans[i] {
            if t.hi >= SEP {
                b.add_trans(pre, SEP, SEP, t.dst, with_zeros(&t.upd, &[1, 0]));
            }
        }
    }
    for s in 0..n {
        copy_trans(&mut b, a, s, s, &|d| d, &[0, 0], &[0, 1]);
        for t in &a.trans[s] {
            if t.hi >= SEP && a.finals[t.dst] {
                b.add_trans(s, SEP, SEP, post, with_zeros(&t.upd, &[0, 1]));
            }
        }
    }
    if shape == SubseqShape::Exact {
        b.add_trans(post, 0, SEP, post, zeros(k + 2));
    }
    b
}

/// `y = subseq(x, k, j)`: `j` elements of `x` from the one after the `k`-th
/// separator, clamped at the end of `x`. Alternatives: an exact segment of
/// `j >= 1` elements, a segment reaching the end of `x`, and the empty
/// result for `j = 0`.
pub fn pre_subseq(a: &Cefa, start: &LinExpr, len: &LinExpr) -> Vec<PreimageAlternative> {
    let a = a.trim();
    let fmt0 = a0();
    let (rs, rl) = (fresh_name("k"), fresh_name("j"));
    let mut map: BTreeMap<String, String> = a.registers.iter().map(|r| (r.clone(), r.clone())).collect();
    map.insert("#start".to_string(), rs.clone());
    map.insert("#len".to_string(), rl.clone());
    let mut out = Vec::new();
    for shape in [SubseqShape::Exact, SubseqShape::ToEnd] {
        let (x, bind_start) = bind_index(renamed(&subseq_automaton(&a, shape), &map), &rs, start);
        let (x, bind_len) = match shape {
            SubseqShape::Exact => bind_index(x, &rl, len),
            SubseqShape::ToEnd => (x, LiaFormula::le(var(&rl), len.clone())),
        };
        let x = x.product(&fmt0).expect("format automaton has no registers");
        if x.is_empty() {
            continue;
        }
        out.push(PreimageAlternative {
            args: vec![x],
            constraint: LiaFormula::and(vec![bind_start, bind_len]),
        });
    }
    // the empty subsequence: x has an element after the k-th separator
    let costs = a.accepts_with_cost(&[SEP]).unwrap_or_default();
    if !costs.is_empty() {
        let mut x = Cefa::new(vec![rs.clone()]);
        let pre = x.add_state(false);
        let mid = x.add_state(false);
        let post = x.add_state(true);
        x.initial = vec![pre];
        x.add_trans(pre, 0, MAX_CHAR, pre, vec![0]);
        x.add_trans(pre, SEP, SEP, pre, vec![1]);
        x.add_trans(pre, SEP, SEP, mid, vec![1]);
        x.add_trans(mid, 0, MAX_CHAR, mid, vec![0]);
        x.add_trans(mid, SEP, SEP, post, vec![0]);
        x.add_trans(post, 0, SEP, post, vec![0]);
        let (x, bind_start) = bind_index(x, &rs, start);
        let x = x.product(&fmt0).expect("format automaton has no registers");
        let zero_len = LiaFormula::eq(len.clone(), LinExpr::constant(0));
        for c in costs {
            out.push(PreimageAlternative {
                args: vec![x.clone()],
                constraint: LiaFormula::and(vec![const_constraint(&a, &c), bind_start.clone(), zero_len.clone()]),
            });
        }
    }
    out
}

/// `y = elem(x, k)`: the element after the `k`-th separator.
pub fn pre_elem(a: &Cefa, index: &LinExpr) -> Vec<PreimageAlternative> {
    let a = a.trim();
    let n = a.num_states();
    let k = a.k();
    let rk = fresh_name("k");
    let mut regs = a.registers.clone();
    regs.push(rk.clone());
    let mut b = Cefa::new(regs);
    for _ in 0..n {
        b.add_state(false);
    }
    let pre = b.add_state(false);
    let post = b.add_state(true);
    b.initial = vec![pre];
    b.add_trans(pre, 0, MAX_CHAR, pre, zeros(k + 1));
    b.add_trans(pre, SEP, SEP, pre, with_zeros(&zeros(k), &[1]));
    for &i in &a.initial {
        b.add_trans(pre, SEP, SEP, i, with_zeros(&zeros(k), &[1]));
    }
    for s in 0..n {
        for t in &a.trans[s] {
            if let (Some((l, h)), _) = split_sep(t.lo, t.hi) {
                b.add_trans(s, l, h, t.dst, with_zeros(&t.upd, &[0]));
            }
        }
        if a.finals[s] {
            b.add_trans(s, SEP, SEP, post, zeros(k + 1));
        }
    }
    b.add_trans(post, 0, SEP, post, zeros(k + 1));
    let (b, constraint) = bind_index(b, &rk, index);
    let b = b.product(&a0()).expect("format automaton has no registers");
    if b.is_empty() {
        return Vec::new();
    }
    vec![PreimageAlternative {
        args: vec![b],
        constraint,
    }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{sep_word, word, Word};
    use crate::automata::Nfa;
    use crate::interp;
    use crate::lia::Model;
    use crate::transducers::Transducer;

    /// `†(a+†)*` with a length register: q0 -†-> q1 -a-> q2 -a-> q2 -†-> q1.
    fn example() -> Cefa {
        let mut c = Cefa::new(vec!["len".into()]);
        let q0 = c.add_state(false);
        let q1 = c.add_state(true);
        let q2 = c.add_state(false);
        c.initial = vec![q0];
        c.add_trans(q0, SEP, SEP, q1, vec![1]);
        c.add_trans(q1, 'a' as Sym, 'a' as Sym, q2, vec![1]);
        c.add_trans(q2, 'a' as Sym, 'a' as Sym, q2, vec![1]);
        c.add_trans(q2, SEP, SEP, q1, vec![1]);
        c
    }

    fn words(alpha: &[Sym], max: usize) -> Vec<Word> {
        crate::interp::brute::words_up_to(alpha, max)
    }

    /// Whether the alternative accepts the argument words with some costs
    /// whose combination satisfies its constraint together with `extra`.
    fn alt_admits(alt: &PreimageAlternative, args: &[Word], extra: &Model) -> bool {
        let mut choices: Vec<Vec<Model>> = Vec::new();
        for (c, w) in alt.args.iter().zip(args) {
            let costs = c.accepts_with_cost(w).unwrap();
            choices.push(
                costs
                    .into_iter()
                    .map(|v| c.registers.iter().cloned().zip(v).collect())
                    .collect(),
            );
        }
        fn go(choices: &[Vec<Model>], acc: Model, f: &LiaFormula) -> bool {
            match choices.split_first() {
                None => f.eval(&acc).unwrap_or(false),
                Some((first, rest)) => first.iter().any(|m| {
                    let mut a = acc.clone();
                    a.extend(m.clone());
                    go(rest, a, f)
                }),
            }
        }
        go(&choices, extra.clone(), &alt.constraint)
    }

    fn model(pairs: &[(&str, i64)]) -> Model {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn concat_splits_of_a_word() {
        let a = Cefa::from_nfa(&Nfa::word(&word("ab")));
        let alts = pre_concat(&a);
        let mut splits = BTreeSet::new();
        for alt in &alts {
            assert_eq!(alt.constraint, LiaFormula::True);
            for w1 in words(&['a' as Sym, 'b' as Sym], 2) {
                for w2 in words(&['a' as Sym, 'b' as Sym], 2) {
                    if alt_admits(alt, &[w1.clone(), w2.clone()], &Model::new()) {
                        splits.insert((w1.clone(), w2));
                    }
                }
            }
        }
        let expected: BTreeSet<(Word, Word)> =
            [("", "ab"), ("a", "b"), ("ab", "")].iter().map(|(x, y)| (word(x), word(y))).collect();
        assert_eq!(splits, expected);
    }

    #[test]
    fn concat_of_lengths_adds_up() {
        let a = strlen_cefa("n".into());
        let alts = pre_concat(&a);
        let alpha = ['a' as Sym, SEP];
        for w1 in words(&alpha, 2) {
            for w2 in words(&alpha, 2) {
                let n = (w1.len() + w2.len()) as i64;
                let ok = alts
                    .iter()
                    .any(|alt| alt_admits(alt, &[w1.clone(), w2.clone()], &model(&[("n", n)])));
                let bad = alts
                    .iter()
                    .any(|alt| alt_admits(alt, &[w1.clone(), w2.clone()], &model(&[("n", n + 1)])));
                assert!(ok && !bad);
            }
        }
    }

    #[test]
    fn nft_join_length() {
        let t = Transducer::Join(Vec::new()).nft().remove_epsilon();
        let alts = pre_nft(&t, &strlen_cefa("n".into())).unwrap();
        let main = &alts[0];
        assert_eq!(
            main.args[0].accepts_with_cost(&sep_word("†ab†c†")).unwrap(),
            [vec![3]].into_iter().collect()
        );
    }

    #[test]
    fn nft_split_inverse() {
        let t = Transducer::SplitStr(crate::regex::Regex::chr('b'));
        let target = Cefa::from_nfa(&Nfa::word(&sep_word("†a†a†")));
        let alts = pre_nft(&t.nft().remove_epsilon(), &target).unwrap();
        let mut accepted = Vec::new();
        for w in words(&['a' as Sym, 'b' as Sym], 5) {
            let by_alts = alts.iter().any(|alt| alt_admits(alt, &[w.clone()], &Model::new()));
            let by_oracle = t.apply(&w) == Some(sep_word("†a†a†"));
            assert_eq!(by_alts, by_oracle, "{w:?}");
            if by_alts {
                accepted.push(w);
            }
        }
        assert_eq!(accepted, vec![word("aba")]);
    }

    #[test]
    fn nft_empty_input() {
        // join of the empty word is undefined, split of "" is (""), encoded "††"
        let t = Transducer::SplitStr(crate::regex::Regex::chr('b'));
        let target = strlen_cefa("n".into());
        let alts = pre_nft(&t.nft().remove_epsilon(), &target).unwrap();
        assert!(alts.iter().any(|alt| alt_admits(alt, &[Vec::new()], &model(&[("n", 2)]))));
        assert!(!alts.iter().any(|alt| alt_admits(alt, &[Vec::new()], &model(&[("n", 1)]))));
    }

    #[test]
    fn write_example() {
        let a = example();
        let alts = pre_write(&a, &LinExpr::var("it"));
        // one in-range pair plus the out-of-range alternative
        assert_eq!(alts.len(), 2);
        let alt = &alts[0];
        let x = &alt.args[0];
        let costs = x.accepts_with_cost(&sep_word("†ab†a†")).unwrap();
        assert_eq!(costs, [vec![4, 1]].into_iter().collect());
        let y = &alt.args[1];
        assert_eq!(y.accepts_with_cost(&word("aa")).unwrap(), [vec![2]].into_iter().collect());
        assert!(alt_admits(alt, &[sep_word("†ab†a†"), word("aa")], &model(&[("len", 6), ("it", 1)])));
        assert!(!alt_admits(alt, &[sep_word("†ab†a†"), word("aa")], &model(&[("len", 6), ("it", 2)])));
    }

    #[test]
    fn subseq_example() {
        let a = example();
        let alts = pre_subseq(&a, &LinExpr::var("i"), &LinExpr::var("j"));
        let exact = &alts[0];
        assert!(exact.args[0]
            .accepts_with_cost(&sep_word("†a†aa†"))
            .unwrap()
            .contains(&vec![4, 2, 1]));
    }

    #[test]
    fn subseq_clamped() {
        // s = (a, b); s[1, 5] = (b)
        let target = Cefa::from_nfa(&Nfa::word(&sep_word("†b†")));
        let alts = pre_subseq(&target, &LinExpr::var("k"), &LinExpr::var("j"));
        let m = model(&[("k", 2), ("j", 5)]);
        assert!(alts.iter().any(|alt| alt_admits(alt, &[sep_word("†a†b†")], &m)));
        assert_eq!(interp::subseq_str(&sep_word("†a†b†"), 2, 5), Some(sep_word("†b†")));
        let m = model(&[("k", 2), ("j", 1)]);
        assert!(alts.iter().any(|alt| alt_admits(alt, &[sep_word("†a†b†c†")], &m)));
    }

    #[test]
    fn subseq_empty_result() {
        let target = Cefa::from_nfa(&Nfa::word(&sep_word("†")));
        let alts = pre_subseq(&target, &LinExpr::var("k"), &LinExpr::var("j"));
        assert!(alts.iter().any(|alt| alt_admits(alt, &[sep_word("†a†")], &model(&[("k", 1), ("j", 0)]))));
        // index past the last element is undefined
        assert!(!alts.iter().any(|alt| alt_admits(alt, &[sep_word("†a†")], &model(&[("k", 2), ("j", 0)]))));
    }

    #[test]
    fn elem_examples() {
        let alts = pre_elem(&Cefa::from_nfa(&Nfa::word(&word("a"))), &LinExpr::var("k"));
        assert!(alt_admits(&alts[0], &[sep_word("††a†")], &model(&[("k", 2)])));
        assert_eq!(interp::nth(&[word(""), word("a")], 1), Some(word("a")));
        let alts = pre_elem(&Cefa::from_nfa(&Nfa::word(&word("ab"))), &LinExpr::var("k"));
        assert!(alt_admits(&alts[0], &[sep_word("†ab†ac†")], &model(&[("k", 1)])));
        assert!(!alt_admits(&alts[0], &[sep_word("†ab†ac†")], &model(&[("k", 2)])));
        assert!(pre_elem(&Cefa::from_nfa(&Nfa::empty()), &LinExpr::var("k")).is_empty());
    }

    /// Constant indices are unfolded into states; the symbolic route with the
    /// index variable bound to the same value must admit the same words.
    #[test]
    fn constant_indices_agree_with_symbolic() {
        let a = example();
        let alpha = ['a' as Sym, 'b' as Sym, SEP];
        let xs: Vec<Word> = words(&alpha, 6)
            .into_iter()
            .filter(|w| crate::alphabet::decode_seq(w).is_some())
            .collect();
        let ys = words(&['a' as Sym, 'b' as Sym], 2);
        for c in 0..=3 {
            let m = model(&[("i", c), ("len", 0)]);
            let ci = LinExpr::constant(c);
            let vi = LinExpr::var("i");
            let admits = |alts: &[PreimageAlternative], args: &[Word], len: i64| {
                let mut m = m.clone();
                m.insert("len".into(), len);
                alts.iter().any(|alt| alt_admits(alt, args, &m))
            };
            let (we, ws) = (pre_write(&a, &ci), pre_write(&a, &vi));
            let (ee, es) = (pre_elem(&a, &ci), pre_elem(&a, &vi));
            let (se, ss) = (pre_subseq(&a, &ci, &LinExpr::constant(1)), pre_subseq(&a, &vi, &LinExpr::constant(1)));
            for x in &xs {
                for len in 0..8 {
                    assert_eq!(admits(&ee, &[x.clone()], len), admits(&es, &[x.clone()], len), "elem {c} {x:?}");
                    assert_eq!(admits(&se, &[x.clone()], len), admits(&ss, &[x.clone()], len), "subseq {c} {x:?}");
                    for y in &ys {
                        let args = [x.clone(), y.clone()];
                        assert_eq!(admits(&we, &args, len), admits(&ws, &args, len), "write {c} {x:?} {y:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn counters() {
        let c = strlen_cefa("n".into());
        assert_eq!(c.accepts_with_cost(&word("abc")).unwrap(), [vec![3]].into_iter().collect());
        let c = seqlen_cefa("n".into());
        assert_eq!(c.accepts_with_cost(&sep_word("†a†b†")).unwrap(), [vec![3]].into_iter().collect());
        assert_eq!(c.accepts_with_cost(&sep_word("†")).unwrap(), [vec![1]].into_iter().collect());
    }
}
