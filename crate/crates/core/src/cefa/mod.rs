//! Cost-enriched finite automata: NFAs whose transitions add integer vectors
//! to a fixed list of write-only registers.

mod image;

pub use image::{cefa_register_image, cefa_witness, RegisterImage};

use crate::alphabet::{show_sym, Sym, Universe};
use crate::automata::{Nfa, State};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CefaError {
    #[error("register {0} occurs in both operands")]
    RegisterClash(String),
    #[error("unknown state {0}")]
    UnknownState(State),
    #[error("register renaming is not injective")]
    NonInjectiveMap,
    #[error("register renaming does not cover {0}")]
    IncompleteMap(String),
    #[error("cost overflow")]
    Overflow,
    #[error("product exceeds {0} states")]
    TooLarge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CTrans {
    pub lo: Sym,
    pub hi: Sym,
    pub dst: State,
    pub upd: Vec<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cefa {
    pub registers: Vec<String>,
    pub trans: Vec<Vec<CTrans>>,
    pub initial: Vec<State>,
    pub finals: Vec<bool>,
}

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A process-wide fresh name `#<prefix><n>`. Script identifiers cannot
/// contain `#`, so these never collide with user variables.
pub fn fresh_name(prefix: &str) -> String {
    format!("#{prefix}{}", FRESH.fetch_add(1, Ordering::Relaxed))
}

impl Cefa {
    pub fn new(registers: Vec<String>) -> Cefa {
        Cefa {
            registers,
            ..Cefa::default()
        }
    }

    pub fn k(&self) -> usize {
        self.registers.len()
    }

    pub fn add_state(&mut self, is_final: bool) -> State {
        self.trans.push(Vec::new());
        self.finals.push(is_final);
        self.trans.len() - 1
    }

    pub fn add_trans(&mut self, src: State, lo: Sym, hi: Sym, dst: State, upd: Vec<i64>) {
        debug_assert_eq!(upd.len(), self.k());
        debug_assert!(lo <= hi);
        self.trans[src].push(CTrans { lo, hi, dst, upd });
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    /// Lifts an NFA to a CEFA without registers.
    pub fn from_nfa(a: &Nfa) -> Cefa {
        let mut c = Cefa::new(Vec::new());
        for s in 0..a.num_states() {
            c.add_state(a.finals[s]);
        }
        for s in 0..a.num_states() {
            for &(l, h, d) in &a.trans[s] {
                c.add_trans(s, l, h, d, Vec::new());
            }
        }
        c.initial = a.initial.clone();
        c
    }

    /// Forgets the costs.
    pub fn to_nfa(&self) -> Nfa {
        let mut a = Nfa::new();
        for s in 0..self.num_states() {
            a.add_state(self.finals[s]);
        }
        for s in 0..self.num_states() {
            for t in &self.trans[s] {
                a.add_trans(s, t.lo, t.hi, t.dst);
            }
        }
        a.initial = self.initial.clone();
        a
    }

    /// Single-state automaton over `u` with one register incremented on the
    /// symbols in `counted`.
    pub fn counter(register: String, u: Universe, counted: &[(Sym, Sym)]) -> Cefa {
        let mut c = Cefa::new(vec![register]);
        let s = c.add_state(true);
        c.initial.push(s);
        let mut pieces: Vec<(Sym, Sym, i64)> = Vec::new();
        let counted = crate::regex::merge_ranges(counted);
        for &(l, h) in &counted {
            if l <= u.max() {
                pieces.push((l, h.min(u.max()), 1));
            }
        }
        for (l, h) in crate::regex::complement_ranges(&counted, u.max()) {
            pieces.push((l, h, 0));
        }
        for (l, h, v) in pieces {
            c.add_trans(s, l, h, s, vec![v]);
        }
        c
    }

    pub fn is_empty(&self) -> bool {
        self.to_nfa().is_empty()
    }

    /// All costs of accepting runs on `w`.
    pub fn accepts_with_cost(&self, w: &[Sym]) -> Result<BTreeSet<Vec<i64>>, CefaError> {
        let mut cur: BTreeSet<(State, Vec<i64>)> = self
            .initial
            .iter()
            .map(|&s| (s, vec![0; self.k()]))
            .collect();
        for &c in w {
            let mut next = BTreeSet::new();
            for (s, cost) in &cur {
                for t in &self.trans[*s] {
                    if t.lo <= c && c <= t.hi {
                        next.insert((t.dst, add_vec(cost, &t.upd)?));
                    }
                }
            }
            cur = next;
            if cur.is_empty() {
                break;
            }
        }
        Ok(cur
            .into_iter()
            .filter(|(s, _)| self.finals[*s])
            .map(|(_, c)| c)
            .collect())
    }

    /// The automaton started in `p` and accepting only in `q`.
    pub fn sub_automaton(&self, p: State, q: State) -> Result<Cefa, CefaError> {
        for s in [p, q] {
            if s >= self.num_states() {
                return Err(CefaError::UnknownState(s));
            }
        }
        let mut out = self.clone();
        out.initial = vec![p];
        out.finals = vec![false; self.num_states()];
        out.finals[q] = true;
        Ok(out)
    }

    pub fn rename_registers(&self, map: &BTreeMap<String, String>) -> Result<Cefa, CefaError> {
        let mut names = Vec::with_capacity(self.k());
        for r in &self.registers {
            match map.get(r) {
                Some(n) => names.push(n.clone()),
                None => return Err(CefaError::IncompleteMap(r.clone())),
            }
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(CefaError::NonInjectiveMap);
        }
        let mut out = self.clone();
        out.registers = names;
        Ok(out)
    }

    /// Renames every register to a fresh name; returns the map used.
    pub fn fresh_copy(&self) -> (Cefa, BTreeMap<String, String>) {
        let map: BTreeMap<String, String> = self
            .registers
            .iter()
            .map(|r| (r.clone(), fresh_name("r")))
            .collect();
        (self.rename_registers(&map).expect("fresh names are injective"), map)
    }

    /// Product over the common alphabet; costs are concatenated.
    pub fn product(&self, other: &Cefa) -> Result<Cefa, CefaError> {
        self.product_capped(other, usize::MAX)
    }

    pub fn product_capped(&self, other: &Cefa, cap: usize) -> Result<Cefa, CefaError> {
        for r in &other.registers {
            if self.registers.contains(r) {
                return Err(CefaError::RegisterClash(r.clone()));
            }
        }
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        let mut out = Cefa::new(regs);
        let mut index: HashMap<(State, State), State> = HashMap::new();
        let mut queue = VecDeque::new();
        for &a in &self.initial {
            for &b in &other.initial {
                if index.contains_key(&(a, b)) {
                    continue;
                }
                let s = out.add_state(self.finals[a] && other.finals[b]);
                index.insert((a, b), s);
                out.initial.push(s);
                queue.push_back((a, b));
            }
        }
        while let Some((a, b)) = queue.pop_front() {
            let src = index[&(a, b)];
            for t1 in &self.trans[a] {
                for t2 in &other.trans[b] {
                    let l = t1.lo.max(t2.lo);
                    let h = t1.hi.min(t2.hi);
                    if l > h {
                        continue;
                    }
                    let dst = match index.get(&(t1.dst, t2.dst)) {
                        Some(&d) => d,
                        None => {
                            if out.num_states() >= cap {
                                return Err(CefaError::TooLarge(cap));
                            }
                            let d = out.add_state(self.finals[t1.dst] && other.finals[t2.dst]);
                            index.insert((t1.dst, t2.dst), d);
                            queue.push_back((t1.dst, t2.dst));
                            d
                        }
                    };
                    let mut upd = t1.upd.clone();
                    upd.extend_from_slice(&t2.upd);
                    out.add_trans(src, l, h, dst, upd);
                }
            }
        }
        Ok(out.trim())
    }

    /// Removes register `reg`, keeping only runs on which it ends at `value`.
    /// The running count is tracked in the states. Returns `None` when some
    /// update of `reg` is negative, since the count could then be unbounded.
    pub fn fix_register(&self, reg: &str, value: i64) -> Option<Cefa> {
        let ri = self.registers.iter().position(|r| r == reg)?;
        if self.trans.iter().flatten().any(|t| t.upd[ri] < 0) {
            return None;
        }
        let mut regs = self.registers.clone();
        regs.remove(ri);
        let mut out = Cefa::new(regs);
        if value < 0 {
            out.add_state(false);
            return Some(out);
        }
        let mut index: HashMap<(State, i64), State> = HashMap::new();
        let mut queue = VecDeque::new();
        for &s in &self.initial {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry((s, 0)) {
                let id = out.add_state(self.finals[s] && value == 0);
                e.insert(id);
                out.initial.push(id);
                queue.push_back((s, 0));
            }
        }
        while let Some((s, c)) = queue.pop_front() {
            let src = index[&(s, c)];
            for t in &self.trans[s] {
                let c2 = c + t.upd[ri];
                if c2 > value {
                    continue;
                }
                let dst = *index.entry((t.dst, c2)).or_insert_with(|| {
                    queue.push_back((t.dst, c2));
                    out.add_state(self.finals[t.dst] && c2 == value)
                });
                let mut upd = t.upd.clone();
                upd.remove(ri);
                out.add_trans(src, t.lo, t.hi, dst, upd);
            }
        }
        Some(out.trim())
    }

    /// Intersection with a register-free NFA.
    pub fn intersect_nfa(&self, a: &Nfa) -> Cefa {
        self.product(&Cefa::from_nfa(a))
            .expect("an NFA has no registers")
    }

    /// Removes useless states and duplicate transitions. Keeps at least one
    /// state so that the result is a well-formed (possibly empty) automaton.
    pub fn trim(&self) -> Cefa {
        let n = self.num_states();
        let mut fwd = vec![false; n];
        let mut stack = self.initial.clone();
        for &s in &stack {
            fwd[s] = true;
        }
        while let Some(s) = stack.pop() {
            for t in &self.trans[s] {
                if !fwd[t.dst] {
                    fwd[t.dst] = true;
                    stack.push(t.dst);
                }
            }
        }
        let mut rev: Vec<Vec<State>> = vec![Vec::new(); n];
        for s in 0..n {
            for t in &self.trans[s] {
                rev[t.dst].push(s);
            }
        }
        let mut bwd = vec![false; n];
        let mut stack: Vec<State> = (0..n).filter(|&s| self.finals[s]).collect();
        for &s in &stack {
            bwd[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &rev[s] {
                if !bwd[p] {
                    bwd[p] = true;
                    stack.push(p);
                }
            }
        }
        let keep: Vec<bool> = (0..n).map(|s| fwd[s] && bwd[s]).collect();
        let mut out = Cefa::new(self.registers.clone());
        if !keep.iter().any(|&k| k) {
            let s = out.add_state(false);
            out.initial.push(s);
            return out;
        }
        let mut map = vec![usize::MAX; n];
        for s in 0..n {
            if keep[s] {
                map[s] = out.add_state(self.finals[s]);
            }
        }
        for s in 0..n {
            if !keep[s] {
                continue;
            }
            let mut ts: Vec<CTrans> = self.trans[s]
                .iter()
                .filter(|t| keep[t.dst])
                .map(|t| CTrans {
                    dst: map[t.dst],
                    ..t.clone()
                })
                .collect();
            ts.sort();
            ts.dedup();
            out.trans[map[s]] = ts;
        }
        let mut init: Vec<State> = self.initial.iter().filter(|&&s| keep[s]).map(|&s| map[s]).collect();
        init.sort();
        init.dedup();
        out.initial = init;
        out
    }

    /// Merges states with identical futures: same finality and the same
    /// outgoing transitions up to the current partition (a bisimulation
    /// quotient). Preserves the weighted language.
    pub fn reduce(&self) -> Cefa {
        let a = self.trim();
        let n = a.num_states();
        let mut class: Vec<usize> = a.finals.iter().map(|&f| f as usize).collect();
        let mut count = class.iter().collect::<BTreeSet<_>>().len();
        loop {
            let mut sigs: BTreeMap<(usize, Vec<(Sym, Sym, usize, Vec<i64>)>), usize> = BTreeMap::new();
            let mut next = vec![0; n];
            for s in 0..n {
                let mut edges: Vec<(Sym, Sym, usize, Vec<i64>)> = a.trans[s]
                    .iter()
                    .map(|t| (t.lo, t.hi, class[t.dst], t.upd.clone()))
                    .collect();
                edges.sort();
                edges.dedup();
                let len = sigs.len();
                next[s] = *sigs.entry((class[s], edges)).or_insert(len);
            }
            class = next;
            if sigs.len() == count {
                break;
            }
            count = sigs.len();
        }
        if count == n {
            return a;
        }
        let mut out = Cefa::new(a.registers.clone());
        for _ in 0..count {
            out.add_state(false);
        }
        let mut done = vec![false; count];
        for s in 0..n {
            let c = class[s];
            out.finals[c] = a.finals[s];
            if done[c] {
                continue;
            }
            done[c] = true;
            for t in &a.trans[s] {
                out.add_trans(c, t.lo, t.hi, class[t.dst], t.upd.clone());
            }
        }
        let mut init: Vec<State> = a.initial.iter().map(|&s| class[s]).collect();
        init.sort();
        init.dedup();
        out.initial = init;
        out.trim()
    }

    /// A size measure used to order alternatives.
    pub fn size(&self) -> usize {
        self.num_states() + self.num_transitions()
    }

    pub fn well_formed(&self) -> bool {
        let n = self.num_states();
        self.finals.len() == n
            && self.initial.iter().all(|&s| s < n)
            && self
                .trans
                .iter()
                .all(|ts| ts.iter().all(|t| t.dst < n && t.lo <= t.hi && t.upd.len() == self.k()))
    }
}

pub(crate) fn add_vec(a: &[i64], b: &[i64]) -> Result<Vec<i64>, CefaError> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_add(*y).ok_or(CefaError::Overflow))
        .collect()
}

impl fmt::Display for Cefa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "registers {}", self.registers.join(" "))?;
        let init: Vec<String> = self.initial.iter().map(|s| s.to_string()).collect();
        let fin: Vec<String> = (0..self.num_states())
            .filter(|&s| self.finals[s])
            .map(|s| s.to_string())
            .collect();
        writeln!(f, "initial {}", init.join(" "))?;
        writeln!(f, "final {}", fin.join(" "))?;
        for (s, ts) in self.trans.iter().enumerate() {
            for t in ts {
                let u: Vec<String> = t.upd.iter().map(|v| v.to_string()).collect();
                writeln!(
                    f,
                    "{s} {}-{} {} ; updates=({})",
                    show_sym(t.lo),
                    show_sym(t.hi),
                    t.dst,
                    u.join(",")
                )?;
            }
        }
        Ok(())
    }
}

pub fn cefa_from_nfa(a: &Nfa) -> Cefa {
    Cefa::from_nfa(a)
}

pub fn cefa_product(a: &Cefa, b: &Cefa) -> Result<Cefa, CefaError> {
    a.product(b)
}

pub fn cefa_accepts_with_cost(a: &Cefa, w: &[Sym]) -> Result<BTreeSet<Vec<i64>>, CefaError> {
    a.accepts_with_cost(w)
}

pub fn cefa_sub_automaton(a: &Cefa, p: State, q: State) -> Result<Cefa, CefaError> {
    a.sub_automaton(p, q)
}

pub fn cefa_rename_registers(a: &Cefa, map: &BTreeMap<String, String>) -> Result<Cefa, CefaError> {
    a.rename_registers(map)
}
