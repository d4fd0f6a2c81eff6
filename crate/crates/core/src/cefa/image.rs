//! Existential LIA formula for the set of register values of accepting runs,
//! and extraction of a witness word from a model of that formula.
//!
//! Runs are abstracted to their sequence of nonzero update vectors. That
//! language is recognised by a small automaton over the (finite) set of
//! update vectors, on which we write the usual Parikh flow constraints with
//! connectivity side conditions.

use super::{Cefa, CTrans};
use crate::alphabet::{Sym, Word};
use crate::automata::{pick_symbol, State};
use crate::lia::{check_sat_with, LiaError, LiaFormula, LiaResult, Limits, LinExpr, Model, Var};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// Subset-construction cap for the compressed automaton; past it the
/// nondeterministic version is used.
const DET_CAP: usize = 2000;

/// Edge label of the zero vector (only used on edges leaving the source).
const ZERO: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct RegisterImage {
    pub registers: Vec<String>,
    pub formula: LiaFormula,
    automaton: Cefa,
    vectors: Vec<Vec<i64>>,
    /// `(src, label, dst)`; label indexes `vectors` or is `ZERO`.
    edges: Vec<(usize, usize, usize)>,
    source: usize,
    yvars: Vec<Var>,
    zvars: Vec<(usize, Var)>,
}

struct Graph {
    n: usize,
    initial: Vec<usize>,
    finals: Vec<bool>,
    edges: BTreeSet<(usize, usize, usize)>,
}

fn zero_closure(a: &Cefa) -> Vec<Vec<State>> {
    (0..a.num_states())
        .map(|p| {
            let mut seen = vec![false; a.num_states()];
            seen[p] = true;
            let mut stack = vec![p];
            let mut out = vec![p];
            while let Some(s) = stack.pop() {
                for t in &a.trans[s] {
                    if t.upd.iter().all(|&v| v == 0) && !seen[t.dst] {
                        seen[t.dst] = true;
                        stack.push(t.dst);
                        out.push(t.dst);
                    }
                }
            }
            out
        })
        .collect()
}

/// The automaton over update-vector ids without zero moves.
fn vector_nfa(a: &Cefa, vectors: &mut Vec<Vec<i64>>) -> Graph {
    let mut ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let closure = zero_closure(a);
    let mut edges = BTreeSet::new();
    let mut finals = vec![false; a.num_states()];
    for p in 0..a.num_states() {
        for &m in &closure[p] {
            finals[p] |= a.finals[m];
            for t in &a.trans[m] {
                if t.upd.iter().all(|&v| v == 0) {
                    continue;
                }
                let id = *ids.entry(t.upd.clone()).or_insert_with(|| {
                    vectors.push(t.upd.clone());
                    vectors.len() - 1
                });
                edges.insert((p, id, t.dst));
            }
        }
    }
    Graph {
        n: a.num_states(),
        initial: a.initial.clone(),
        finals,
        edges,
    }
}

fn determinize(g: &Graph) -> Option<Graph> {
    let mut succ: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); g.n];
    for &(p, l, q) in &g.edges {
        succ[p].entry(l).or_default().push(q);
    }
    let mut start: Vec<usize> = g.initial.clone();
    start.sort();
    start.dedup();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut sets = vec![start.clone()];
    index.insert(start, 0);
    let mut edges = BTreeSet::new();
    let mut i = 0;
    while i < sets.len() {
        let mut by_label: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &s in &sets[i] {
            for (&l, ds) in &succ[s] {
                by_label.entry(l).or_default().extend(ds.iter().copied());
            }
        }
        for (l, ds) in by_label {
            let ds: Vec<usize> = ds.into_iter().collect();
            let d = match index.get(&ds) {
                Some(&d) => d,
                None => {
                    if sets.len() >= DET_CAP {
                        return None;
                    }
                    sets.push(ds.clone());
                    index.insert(ds, sets.len() - 1);
                    sets.len() - 1
                }
            };
            edges.insert((i, l, d));
        }
        i += 1;
    }
    let finals = sets.iter().map(|s| s.iter().any(|&q| g.finals[q])).collect();
    Some(Graph {
        n: sets.len(),
        initial: vec![0],
        finals,
        edges,
    })
}

/// Moore partition refinement for a partial DFA.
fn minimize(g: &Graph) -> Graph {
    let mut out_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.n];
    for &(p, l, q) in &g.edges {
        out_edges[p].push((l, q));
    }
    let mut class: Vec<usize> = g.finals.iter().map(|&f| f as usize).collect();
    let mut count = class.iter().collect::<BTreeSet<_>>().len();
    loop {
        let mut sigs: BTreeMap<(usize, Vec<(usize, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0; g.n];
        for s in 0..g.n {
            let mut sig: Vec<(usize, usize)> = out_edges[s].iter().map(|&(l, q)| (l, class[q])).collect();
            sig.sort();
            let len = sigs.len();
            next[s] = *sigs.entry((class[s], sig)).or_insert(len);
        }
        class = next;
        if sigs.len() == count {
            break;
        }
        count = sigs.len();
    }
    let mut finals = vec![false; count];
    for s in 0..g.n {
        finals[class[s]] |= g.finals[s];
    }
    Graph {
        n: count,
        initial: g.initial.iter().map(|&s| class[s]).collect::<BTreeSet<_>>().into_iter().collect(),
        finals,
        edges: g.edges.iter().map(|&(p, l, q)| (class[p], l, class[q])).collect(),
    }
}

/// Strongly connected component ids (iterative Tarjan).
fn scc(n: usize, succ: &[Vec<usize>]) -> Vec<usize> {
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

fn sum(vars: &[&Var]) -> LinExpr {
    let mut e = LinExpr::constant(0);
    for v in vars {
        e.add_term(v, 1);
    }
    e
}

pub fn cefa_register_image(cefa: &Cefa) -> RegisterImage {
    let a = cefa.trim();
    let nonempty = a.finals.iter().any(|&f| f);
    let mut img = RegisterImage {
        registers: a.registers.clone(),
        formula: if nonempty { LiaFormula::True } else { LiaFormula::False },
        automaton: a,
        vectors: Vec::new(),
        edges: Vec::new(),
        source: 0,
        yvars: Vec::new(),
        zvars: Vec::new(),
    };
    if !nonempty || img.registers.is_empty() {
        return img;
    }
    let mut vectors = Vec::new();
    let nfa = vector_nfa(&img.automaton, &mut vectors);
    let g = match determinize(&nfa) {
        Some(d) => minimize(&d),
        None => nfa,
    };
    let source = g.n;
    let n = g.n + 1;
    let mut edges: Vec<(usize, usize, usize)> = g.initial.iter().map(|&i| (source, ZERO, i)).collect();
    edges.extend(g.edges.iter().copied());
    let tag = super::fresh_name("img");
    let yvars: Vec<Var> = (0..edges.len()).map(|e| format!("{tag}_y{e}")).collect();
    let zvars: Vec<(usize, Var)> = (0..g.n)
        .filter(|&q| g.finals[q])
        .map(|q| (q, format!("{tag}_z{q}")))
        .collect();
    let dvar = |q: usize| format!("{tag}_d{q}");

    let mut parts = Vec::new();
    for y in &yvars {
        parts.push(LiaFormula::le(LinExpr::constant(0), LinExpr::var(y.clone())));
    }
    for (_, z) in &zvars {
        parts.push(LiaFormula::le(LinExpr::constant(0), LinExpr::var(z.clone())));
        parts.push(LiaFormula::le(LinExpr::var(z.clone()), LinExpr::constant(1)));
    }
    let zs: Vec<&Var> = zvars.iter().map(|(_, z)| z).collect();
    parts.push(LiaFormula::eq(sum(&zs), LinExpr::constant(1)));

    let mut ins: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut outs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(p, _, q)) in edges.iter().enumerate() {
        outs[p].push(e);
        ins[q].push(e);
    }
    let zmap: BTreeMap<usize, &Var> = zvars.iter().map(|(q, z)| (*q, z)).collect();
    for q in 0..n {
        let inflow: Vec<&Var> = ins[q].iter().map(|&e| &yvars[e]).collect();
        let outflow: Vec<&Var> = outs[q].iter().map(|&e| &yvars[e]).collect();
        let mut lhs = sum(&inflow);
        if q == source {
            lhs = lhs.plus_const(1);
        }
        let mut rhs = sum(&outflow);
        if let Some(z) = zmap.get(&q) {
            rhs.add_term(z, 1);
        }
        parts.push(LiaFormula::eq(lhs, rhs));
    }
    for (i, r) in img.registers.iter().enumerate() {
        let mut e = LinExpr::constant(0);
        for (k, &(_, l, _)) in edges.iter().enumerate() {
            if l != ZERO && vectors[l][i] != 0 {
                e.add_term(&yvars[k], vectors[l][i]);
            }
        }
        parts.push(LiaFormula::eq(LinExpr::var(r.clone()), e));
    }

    let succ: Vec<Vec<usize>> = (0..n)
        .map(|p| outs[p].iter().map(|&e| edges[e].2).collect())
        .collect();
    let comp = scc(n, &succ);
    let mut comp_size = vec![0usize; n];
    for q in 0..n {
        comp_size[comp[q]] += 1;
    }
    for q in 0..n {
        let cyclic = comp_size[comp[q]] > 1 || succ[q].contains(&q);
        if !cyclic {
            continue;
        }
        let inflow: Vec<&Var> = ins[q].iter().map(|&e| &yvars[e]).collect();
        let mut alts = vec![LiaFormula::eq(sum(&inflow), LinExpr::constant(0))];
        for &e in &ins[q] {
            let p = edges[e].0;
            if p == q {
                continue;
            }
            let used = LiaFormula::le(LinExpr::constant(1), LinExpr::var(yvars[e].clone()));
            if comp[p] == comp[q] {
                alts.push(LiaFormula::and(vec![
                    used,
                    LiaFormula::le(LinExpr::var(dvar(p)).plus_const(1), LinExpr::var(dvar(q))),
                ]));
            } else {
                alts.push(used);
            }
        }
        parts.push(LiaFormula::or(alts));
        // depths in a spanning tree of the used part never exceed n
        parts.push(LiaFormula::le(LinExpr::constant(0), LinExpr::var(dvar(q))));
        parts.push(LiaFormula::le(LinExpr::var(dvar(q)), LinExpr::constant(n as i64)));
    }
    img.formula = LiaFormula::and(parts);
    img.vectors = vectors;
    img.edges = edges;
    img.source = source;
    img.yvars = yvars;
    img.zvars = zvars;
    img
}

impl RegisterImage {
    /// A word accepted by the automaton with register values as in `m`.
    /// `m` must satisfy `self.formula`.
    pub fn witness(&self, m: &Model) -> Option<Word> {
        let a = &self.automaton;
        if !a.finals.iter().any(|&f| f) {
            return None;
        }
        if self.registers.is_empty() {
            return a.to_nfa().shortest_word();
        }
        let target = self
            .zvars
            .iter()
            .find(|(_, z)| m.get(z).copied().unwrap_or(0) == 1)
            .map(|(q, _)| *q)?;
        let labels = self.euler_labels(m, target)?;
        self.replay(&labels)
    }

    /// Nonzero vector labels along an Euler path from the source to `target`
    /// using every edge as often as its count in `m`.
    fn euler_labels(&self, m: &Model, target: usize) -> Option<Vec<usize>> {
        let n = self.source + 1;
        let mut remaining: Vec<i64> = self
            .yvars
            .iter()
            .map(|y| m.get(y).copied().unwrap_or(0))
            .collect();
        if remaining.iter().any(|&c| c < 0) {
            return None;
        }
        let total: i64 = remaining.iter().sum();
        let mut outs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, &(p, _, _)) in self.edges.iter().enumerate() {
            if remaining[e] > 0 {
                outs[p].push(e);
            }
        }
        let mut ptr = vec![0usize; n];
        let mut path: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, Option<usize>)> = vec![(self.source, None)];
        while let Some(&(v, via)) = stack.last() {
            while ptr[v] < outs[v].len() && remaining[outs[v][ptr[v]]] == 0 {
                ptr[v] += 1;
            }
            if ptr[v] < outs[v].len() {
                let e = outs[v][ptr[v]];
                remaining[e] -= 1;
                stack.push((self.edges[e].2, Some(e)));
            } else {
                stack.pop();
                if let Some(e) = via {
                    path.push(e);
                }
            }
        }
        path.reverse();
        if path.len() as i64 != total {
            return None;
        }
        let end = path.last().map_or(self.source, |&e| self.edges[e].2);
        if end != target {
            return None;
        }
        Some(
            path.into_iter()
                .map(|e| self.edges[e].1)
                .filter(|&l| l != ZERO)
                .collect(),
        )
    }

    /// Finds a run of the original automaton whose nonzero updates are
    /// exactly `labels`, and reads a word off it.
    fn replay(&self, labels: &[usize]) -> Option<Word> {
        let a = &self.automaton;
        let goal = labels.len();
        let mut parent: HashMap<(State, usize), Option<((State, usize), Sym)>> = HashMap::new();
        let mut queue = VecDeque::new();
        for &s in &a.initial {
            if parent.insert((s, 0), None).is_none() {
                queue.push_back((s, 0));
            }
        }
        let mut found = None;
        while let Some((s, i)) = queue.pop_front() {
            if i == goal && a.finals[s] {
                found = Some((s, i));
                break;
            }
            for t in &a.trans[s] {
                let CTrans { lo, hi, dst, upd } = t;
                let j = if upd.iter().all(|&v| v == 0) {
                    i
                } else if i < goal && *upd == self.vectors[labels[i]] {
                    i + 1
                } else {
                    continue;
                };
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry((*dst, j)) {
                    e.insert(Some(((s, i), pick_symbol(*lo, *hi))));
                    queue.push_back((*dst, j));
                }
            }
        }
        let mut node = found?;
        let mut w = Vec::new();
        while let Some(Some((prev, c))) = parent.get(&node) {
            w.push(*c);
            node = *prev;
        }
        w.reverse();
        Some(w)
    }

    /// Auxiliary variables introduced by the formula.
    pub fn aux_vars(&self) -> impl Iterator<Item = &Var> {
        self.yvars.iter().chain(self.zvars.iter().map(|(_, z)| z))
    }
}

/// A word accepted with register values `c` (in register order), if any.
pub fn cefa_witness(a: &Cefa, c: &[i64]) -> Result<Option<Word>, LiaError> {
    let img = cefa_register_image(a);
    let mut parts = vec![img.formula.clone()];
    for (r, v) in img.registers.iter().zip(c) {
        parts.push(LiaFormula::eq(LinExpr::var(r.clone()), LinExpr::constant(*v)));
    }
    match check_sat_with(&LiaFormula::and(parts), &Limits::default())? {
        LiaResult::Unsat => Ok(None),
        LiaResult::Sat(m) => Ok(img.witness(&m)),
    }
}
