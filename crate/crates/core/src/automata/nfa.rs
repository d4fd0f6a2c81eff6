use crate::alphabet::{show_sym, Sym, Universe};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

pub type State = usize;

/// An epsilon-free NFA whose transitions are labelled by inclusive symbol
/// ranges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Nfa {
    pub trans: Vec<Vec<(Sym, Sym, State)>>,
    pub initial: Vec<State>,
    pub finals: Vec<bool>,
}

/// Splits a set of possibly overlapping ranges into disjoint pieces such that
/// every input range is a union of pieces. Pieces cover exactly the union of
/// the inputs.
pub fn split_ranges(ranges: impl IntoIterator<Item = (Sym, Sym)>) -> Vec<(Sym, Sym)> {
    let mut events: Vec<(u64, i32)> = Vec::new();
    for (l, h) in ranges {
        events.push((l as u64, 1));
        events.push((h as u64 + 1, -1));
    }
    events.sort();
    let mut out = Vec::new();
    let mut depth = 0;
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x {
            depth += events[i].1;
            i += 1;
        }
        if depth > 0 && i < events.len() {
            let next = events[i].0;
            out.push((x as Sym, (next - 1) as Sym));
        }
    }
    out
}

impl Nfa {
    pub fn new() -> Nfa {
        Nfa::default()
    }

    pub fn add_state(&mut self, is_final: bool) -> State {
        self.trans.push(Vec::new());
        self.finals.push(is_final);
        self.trans.len() - 1
    }

    pub fn add_trans(&mut self, src: State, lo: Sym, hi: Sym, dst: State) {
        debug_assert!(lo <= hi);
        self.trans[src].push((lo, hi, dst));
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    /// Accepts nothing.
    pub fn empty() -> Nfa {
        let mut a = Nfa::new();
        let s = a.add_state(false);
        a.initial.push(s);
        a
    }

    /// Accepts every word over the universe.
    pub fn universal(u: Universe) -> Nfa {
        let mut a = Nfa::new();
        let s = a.add_state(true);
        a.initial.push(s);
        a.add_trans(s, 0, u.max(), s);
        a
    }

    /// Accepts exactly `w`.
    pub fn word(w: &[Sym]) -> Nfa {
        let mut a = Nfa::new();
        let mut s = a.add_state(w.is_empty());
        a.initial.push(s);
        for (i, &c) in w.iter().enumerate() {
            let t = a.add_state(i + 1 == w.len());
            a.add_trans(s, c, c, t);
            s = t;
        }
        a
    }

    fn step(&self, cur: &BTreeSet<State>, c: Sym) -> BTreeSet<State> {
        let mut next = BTreeSet::new();
        for &s in cur {
            for &(l, h, d) in &self.trans[s] {
                if l <= c && c <= h {
                    next.insert(d);
                }
            }
        }
        next
    }

    pub fn accepts(&self, w: &[Sym]) -> bool {
        let mut cur: BTreeSet<State> = self.initial.iter().copied().collect();
        for &c in w {
            cur = self.step(&cur, c);
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|&s| self.finals[s])
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<State> = self.initial.clone();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &(_, _, d) in &self.trans[s] {
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        seen
    }

    pub fn is_empty(&self) -> bool {
        let seen = self.reachable();
        !(0..self.num_states()).any(|s| seen[s] && self.finals[s])
    }

    /// A shortest accepted word, if any. Prefers the lowest symbol of each
    /// range, except that it avoids the separator and control characters when
    /// a range offers something printable.
    pub fn shortest_word(&self) -> Option<Vec<Sym>> {
        let n = self.num_states();
        let mut prev: Vec<Option<(State, Sym)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in &self.initial {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            if self.finals[s] {
                let mut w = Vec::new();
                let mut cur = s;
                while let Some((p, c)) = prev[cur] {
                    w.push(c);
                    cur = p;
                }
                w.reverse();
                return Some(w);
            }
            for &(l, h, d) in &self.trans[s] {
                if !seen[d] {
                    seen[d] = true;
                    prev[d] = Some((s, pick_symbol(l, h)));
                    queue.push_back(d);
                }
            }
        }
        None
    }

    /// Removes states that are not both reachable and co-reachable,
    /// renumbering the rest. Always keeps at least one state.
    pub fn trim(&self) -> Nfa {
        let fwd = self.reachable();
        let n = self.num_states();
        let mut rev: Vec<Vec<State>> = vec![Vec::new(); n];
        for s in 0..n {
            for &(_, _, d) in &self.trans[s] {
                rev[d].push(s);
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
        if !keep.iter().any(|&k| k) {
            return Nfa::empty();
        }
        let mut map = vec![usize::MAX; n];
        let mut out = Nfa::new();
        for s in 0..n {
            if keep[s] {
                map[s] = out.add_state(self.finals[s]);
            }
        }
        for s in 0..n {
            if !keep[s] {
                continue;
            }
            for &(l, h, d) in &self.trans[s] {
                if keep[d] {
                    out.add_trans(map[s], l, h, map[d]);
                }
            }
        }
        out.initial = self
            .initial
            .iter()
            .filter(|&&s| keep[s])
            .map(|&s| map[s])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        out
    }

    /// Product automaton; only reachable pairs are built.
    pub fn intersect(&self, other: &Nfa) -> Nfa {
        let mut out = Nfa::new();
        let mut index: HashMap<(State, State), State> = HashMap::new();
        let mut queue = VecDeque::new();
        for &a in &self.initial {
            for &b in &other.initial {
                let s = out.add_state(self.finals[a] && other.finals[b]);
                index.insert((a, b), s);
                out.initial.push(s);
                queue.push_back((a, b));
            }
        }
        while let Some((a, b)) = queue.pop_front() {
            let src = index[&(a, b)];
            for &(l1, h1, d1) in &self.trans[a] {
                for &(l2, h2, d2) in &other.trans[b] {
                    let l = l1.max(l2);
                    let h = h1.min(h2);
                    if l > h {
                        continue;
                    }
                    let dst = *index.entry((d1, d2)).or_insert_with(|| {
                        queue.push_back((d1, d2));
                        out.trans.push(Vec::new());
                        out.finals.push(self.finals[d1] && other.finals[d2]);
                        out.trans.len() - 1
                    });
                    out.add_trans(src, l, h, dst);
                }
            }
        }
        out
    }

    /// Disjoint union.
    pub fn union(&self, other: &Nfa) -> Nfa {
        let mut out = self.clone();
        let off = out.num_states();
        for s in 0..other.num_states() {
            out.add_state(other.finals[s]);
        }
        for s in 0..other.num_states() {
            for &(l, h, d) in &other.trans[s] {
                out.add_trans(s + off, l, h, d + off);
            }
        }
        out.initial.extend(other.initial.iter().map(|&s| s + off));
        out
    }

    /// Subset construction. With `complete = Some(u)`, the result is total
    /// over `u` (a sink state is added when needed) and symbols outside `u`
    /// are dropped.
    pub fn determinize(&self, complete: Option<Universe>) -> Nfa {
        let mut out = Nfa::new();
        let mut index: BTreeMap<BTreeSet<State>, State> = BTreeMap::new();
        let start: BTreeSet<State> = self.initial.iter().copied().collect();
        let mut queue = VecDeque::new();
        let s0 = out.add_state(start.iter().any(|&s| self.finals[s]));
        out.initial.push(s0);
        index.insert(start.clone(), s0);
        queue.push_back(start);
        let mut sink: Option<State> = None;
        while let Some(set) = queue.pop_front() {
            let src = index[&set];
            let labels: Vec<(Sym, Sym)> = set
                .iter()
                .flat_map(|&s| self.trans[s].iter().map(|&(l, h, _)| (l, h)))
                .filter(|&(l, _)| complete.map_or(true, |u| l <= u.max()))
                .map(|(l, h)| (l, complete.map_or(h, |u| h.min(u.max()))))
                .collect();
            let pieces = split_ranges(labels);
            let mut covered: Vec<(Sym, Sym)> = Vec::new();
            // group consecutive pieces with equal targets to limit transitions
            let mut grouped: Vec<(Sym, Sym, BTreeSet<State>)> = Vec::new();
            for (l, h) in pieces {
                let mut tgt = BTreeSet::new();
                for &s in &set {
                    for &(tl, th, d) in &self.trans[s] {
                        if tl <= l && h <= th {
                            tgt.insert(d);
                        }
                    }
                }
                covered.push((l, h));
                if let Some(last) = grouped.last_mut() {
                    if last.1.checked_add(1) == Some(l) && last.2 == tgt {
                        last.1 = h;
                        continue;
                    }
                }
                grouped.push((l, h, tgt));
            }
            for (l, h, tgt) in grouped {
                let dst = match index.get(&tgt) {
                    Some(&d) => d,
                    None => {
                        let d = out.add_state(tgt.iter().any(|&s| self.finals[s]));
                        index.insert(tgt.clone(), d);
                        queue.push_back(tgt);
                        d
                    }
                };
                out.add_trans(src, l, h, dst);
            }
            if let Some(u) = complete {
                let gaps = crate::regex::complement_ranges(&covered, u.max());
                if !gaps.is_empty() {
                    let k = *sink.get_or_insert_with(|| {
                        let k = out.add_state(false);
                        out.add_trans(k, 0, u.max(), k);
                        k
                    });
                    for (l, h) in gaps {
                        out.add_trans(src, l, h, k);
                    }
                }
            }
        }
        out
    }

    /// Complement with respect to all words over `u`.
    pub fn complement(&self, u: Universe) -> Nfa {
        let mut d = self.determinize(Some(u));
        for f in d.finals.iter_mut() {
            *f = !*f;
        }
        d
    }

    /// Determinizes and merges equivalent states (Moore refinement).
    pub fn minimize(&self) -> Nfa {
        let d = self.trim().determinize(None);
        let n = d.num_states();
        if n <= 1 {
            return d.trim();
        }
        let mut class: Vec<usize> = d.finals.iter().map(|&f| f as usize).collect();
        loop {
            let mut sigs: BTreeMap<(usize, Vec<(Sym, Sym, usize)>), usize> = BTreeMap::new();
            let mut next = vec![0; n];
            for s in 0..n {
                let mut edges: Vec<(Sym, Sym, usize)> = d.trans[s]
                    .iter()
                    .map(|&(l, h, t)| (l, h, class[t]))
                    .collect();
                edges.sort();
                // merge adjacent ranges with equal target class
                let mut merged: Vec<(Sym, Sym, usize)> = Vec::new();
                for e in edges {
                    if let Some(last) = merged.last_mut() {
                        if last.2 == e.2 && last.1.checked_add(1) == Some(e.0) {
                            last.1 = e.1;
                            continue;
                        }
                    }
                    merged.push(e);
                }
                let len = sigs.len();
                next[s] = *sigs.entry((class[s], merged)).or_insert(len);
            }
            let before = class.iter().collect::<BTreeSet<_>>().len();
            let after = sigs.len();
            class = next;
            if after == before {
                break;
            }
        }
        let k = class.iter().max().map_or(0, |m| m + 1);
        let mut out = Nfa::new();
        for _ in 0..k {
            out.add_state(false);
        }
        let mut done = vec![false; k];
        for s in 0..n {
            let c = class[s];
            out.finals[c] = d.finals[s];
            if done[c] {
                continue;
            }
            done[c] = true;
            for &(l, h, t) in &d.trans[s] {
                out.add_trans(c, l, h, class[t]);
            }
        }
        out.initial = vec![class[d.initial[0]]];
        out.trim()
    }

    /// Checks that every transition endpoint and initial state is declared.
    pub fn well_formed(&self) -> bool {
        let n = self.num_states();
        self.finals.len() == n
            && self.initial.iter().all(|&s| s < n)
            && self
                .trans
                .iter()
                .all(|ts| ts.iter().all(|&(l, h, d)| l <= h && d < n))
    }
}

/// Picks a readable representative of a symbol range.
pub fn pick_symbol(lo: Sym, hi: Sym) -> Sym {
    for pref in [('a' as Sym, 'z' as Sym), ('0' as Sym, '9' as Sym), ('A' as Sym, 'Z' as Sym), (0x21, 0x7E)] {
        let l = lo.max(pref.0);
        let h = hi.min(pref.1);
        if l <= h {
            return l;
        }
    }
    if lo == crate::alphabet::SEP || (hi == crate::alphabet::SEP && lo == hi) {
        return crate::alphabet::SEP;
    }
    lo
}

impl fmt::Display for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let init: Vec<String> = self.initial.iter().map(|s| s.to_string()).collect();
        let fin: Vec<String> = (0..self.num_states())
            .filter(|&s| self.finals[s])
            .map(|s| s.to_string())
            .collect();
        writeln!(f, "initial {}", init.join(" "))?;
        writeln!(f, "final {}", fin.join(" "))?;
        for (s, ts) in self.trans.iter().enumerate() {
            for &(l, h, d) in ts {
                writeln!(f, "{s} {}-{} {d}", show_sym(l), show_sym(h))?;
            }
        }
        Ok(())
    }
}
