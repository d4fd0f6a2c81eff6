use super::nfa::State;
use crate::alphabet::{show_sym, Sym, Word};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use thiserror::Error;

/// One symbol of transducer output: a fixed symbol, or a copy of the symbol
/// just read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutItem {
    Lit(Sym),
    Copy,
}

pub type Output = Vec<OutItem>;

pub fn lit_output(w: &[Sym]) -> Output {
    w.iter().map(|&c| OutItem::Lit(c)).collect()
}

/// Instantiates an output for input symbol `c`.
pub fn render(out: &[OutItem], c: Option<Sym>) -> Word {
    out.iter()
        .map(|o| match o {
            OutItem::Lit(x) => *x,
            OutItem::Copy => c.expect("copy output on a spontaneous transition"),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NftTrans {
    /// `None` marks a spontaneous transition.
    pub input: Option<(Sym, Sym)>,
    pub dst: State,
    pub out: Output,
}

/// A nondeterministic finite transducer with spontaneous transitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Nft {
    pub trans: Vec<Vec<NftTrans>>,
    pub initial: Vec<State>,
    pub finals: Vec<bool>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NftError {
    #[error("more than {0} distinct outputs")]
    OutputOverflow(usize),
}

impl Nft {
    pub fn new() -> Nft {
        Nft::default()
    }

    pub fn add_state(&mut self, is_final: bool) -> State {
        self.trans.push(Vec::new());
        self.finals.push(is_final);
        self.trans.len() - 1
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn add(&mut self, src: State, lo: Sym, hi: Sym, dst: State, out: Output) {
        self.trans[src].push(NftTrans {
            input: Some((lo, hi)),
            dst,
            out,
        });
    }

    pub fn add_eps(&mut self, src: State, dst: State, out: Output) {
        debug_assert!(out.iter().all(|o| matches!(o, OutItem::Lit(_))));
        self.trans[src].push(NftTrans {
            input: None,
            dst,
            out,
        });
    }

    /// All outputs of accepting runs on `w`.
    pub fn outputs(&self, w: &[Sym], max: usize) -> Result<BTreeSet<Word>, NftError> {
        let mut results = BTreeSet::new();
        let mut seen: HashSet<(State, usize, Word)> = HashSet::new();
        let mut stack: Vec<(State, usize, Word)> = self
            .initial
            .iter()
            .map(|&s| (s, 0, Vec::new()))
            .collect();
        while let Some(cfg) = stack.pop() {
            if !seen.insert(cfg.clone()) {
                continue;
            }
            let (s, i, out) = cfg;
            if i == w.len() && self.finals[s] {
                results.insert(out.clone());
                if results.len() > max {
                    return Err(NftError::OutputOverflow(max));
                }
            }
            for t in &self.trans[s] {
                match t.input {
                    None => {
                        let mut o = out.clone();
                        o.extend(render(&t.out, None));
                        stack.push((t.dst, i, o));
                    }
                    Some((l, h)) => {
                        if i < w.len() && l <= w[i] && w[i] <= h {
                            let mut o = out.clone();
                            o.extend(render(&t.out, Some(w[i])));
                            stack.push((t.dst, i + 1, o));
                        }
                    }
                }
            }
        }
        Ok(results)
    }

    /// Spontaneous closure of `q`: every `(state, output)` reachable through
    /// spontaneous transitions only.
    fn closure(&self, q: State) -> BTreeSet<(State, Word)> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![(q, Vec::new())];
        while let Some((s, o)) = stack.pop() {
            if !seen.insert((s, o.clone())) {
                continue;
            }
            for t in &self.trans[s] {
                if t.input.is_none() {
                    let mut o2 = o.clone();
                    o2.extend(render(&t.out, None));
                    stack.push((t.dst, o2));
                }
            }
        }
        seen
    }

    /// Eliminates spontaneous transitions. Outputs produced by spontaneous
    /// steps before a symbol are prepended to that symbol's output; outputs
    /// produced after the last symbol become per-state final outputs.
    pub fn remove_epsilon(&self) -> EpsFreeNft {
        let n = self.num_states();
        let mut out = EpsFreeNft {
            trans: vec![Vec::new(); n],
            initial: self.initial.clone(),
            final_outputs: vec![BTreeSet::new(); n],
        };
        for q in 0..n {
            let mut edges = BTreeSet::new();
            for (q1, o1) in self.closure(q) {
                if self.finals[q1] {
                    out.final_outputs[q].insert(o1.clone());
                }
                for t in &self.trans[q1] {
                    if let Some((l, h)) = t.input {
                        let mut o = lit_output(&o1);
                        o.extend(t.out.iter().copied());
                        edges.insert((l, h, t.dst, o));
                    }
                }
            }
            out.trans[q] = edges.into_iter().collect();
        }
        out.trim()
    }
}

/// An NFT without spontaneous transitions. A run on a nonempty input ends in
/// some state `q` and appends one of `final_outputs[q]`; `q` accepts iff that
/// set is nonempty. On the empty input the outputs are `empty_outputs()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsFreeNft {
    pub trans: Vec<Vec<(Sym, Sym, State, Output)>>,
    pub initial: Vec<State>,
    pub final_outputs: Vec<BTreeSet<Word>>,
}

impl EpsFreeNft {
    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn is_final(&self, q: State) -> bool {
        !self.final_outputs[q].is_empty()
    }

    pub fn empty_outputs(&self) -> BTreeSet<Word> {
        self.initial
            .iter()
            .flat_map(|&i| self.final_outputs[i].iter().cloned())
            .collect()
    }

    pub fn outputs(&self, w: &[Sym], max: usize) -> Result<BTreeSet<Word>, NftError> {
        let mut cur: BTreeMap<State, BTreeSet<Word>> = BTreeMap::new();
        for &i in &self.initial {
            cur.entry(i).or_default().insert(Vec::new());
        }
        for &c in w {
            let mut next: BTreeMap<State, BTreeSet<Word>> = BTreeMap::new();
            for (s, outs) in &cur {
                for (l, h, d, o) in &self.trans[*s] {
                    if *l <= c && c <= *h {
                        let r = render(o, Some(c));
                        let entry = next.entry(*d).or_default();
                        for prefix in outs {
                            let mut x = prefix.clone();
                            x.extend_from_slice(&r);
                            entry.insert(x);
                        }
                        if entry.len() > max {
                            return Err(NftError::OutputOverflow(max));
                        }
                    }
                }
            }
            cur = next;
        }
        let mut res = BTreeSet::new();
        for (s, outs) in cur {
            for o in &outs {
                for f in &self.final_outputs[s] {
                    let mut x = o.clone();
                    x.extend_from_slice(f);
                    res.insert(x);
                    if res.len() > max {
                        return Err(NftError::OutputOverflow(max));
                    }
                }
            }
        }
        Ok(res)
    }

    /// Drops states that cannot reach an accepting state or be reached from
    /// an initial one.
    pub fn trim(&self) -> EpsFreeNft {
        let n = self.num_states();
        let mut fwd = vec![false; n];
        let mut stack = self.initial.clone();
        for &s in &stack {
            fwd[s] = true;
        }
        while let Some(s) = stack.pop() {
            for t in &self.trans[s] {
                if !fwd[t.2] {
                    fwd[t.2] = true;
                    stack.push(t.2);
                }
            }
        }
        let mut rev: Vec<Vec<State>> = vec![Vec::new(); n];
        for s in 0..n {
            for t in &self.trans[s] {
                rev[t.2].push(s);
            }
        }
        let mut bwd = vec![false; n];
        let mut stack: Vec<State> = (0..n).filter(|&s| self.is_final(s)).collect();
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
        let mut map = vec![usize::MAX; n];
        let mut k = 0;
        for s in 0..n {
            if keep[s] {
                map[s] = k;
                k += 1;
            }
        }
        let mut out = EpsFreeNft {
            trans: vec![Vec::new(); k],
            initial: self.initial.iter().filter(|&&s| keep[s]).map(|&s| map[s]).collect(),
            final_outputs: vec![BTreeSet::new(); k],
        };
        for s in 0..n {
            if !keep[s] {
                continue;
            }
            out.final_outputs[map[s]] = self.final_outputs[s].clone();
            for (l, h, d, o) in &self.trans[s] {
                if keep[*d] {
                    out.trans[map[s]].push((*l, *h, map[*d], o.clone()));
                }
            }
        }
        out
    }
}

fn show_output(o: &[OutItem]) -> String {
    o.iter()
        .map(|x| match x {
            OutItem::Lit(c) => show_sym(*c),
            OutItem::Copy => "$".to_string(),
        })
        .collect()
}

impl fmt::Display for Nft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let init: Vec<String> = self.initial.iter().map(|s| s.to_string()).collect();
        let fin: Vec<String> = (0..self.num_states())
            .filter(|&s| self.finals[s])
            .map(|s| s.to_string())
            .collect();
        writeln!(f, "initial {}", init.join(" "))?;
        writeln!(f, "final {}", fin.join(" "))?;
        for (s, ts) in self.trans.iter().enumerate() {
            for t in ts {
                match t.input {
                    Some((l, h)) => write!(f, "{s} {}-{} {}", show_sym(l), show_sym(h), t.dst)?,
                    None => write!(f, "{s} eps {}", t.dst)?,
                }
                writeln!(f, " / {}", show_output(&t.out))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::word;

    fn identity() -> Nft {
        let mut t = Nft::new();
        let s = t.add_state(true);
        t.initial.push(s);
        t.add(s, 0, 0x10FFFF, s, vec![OutItem::Copy]);
        t
    }

    #[test]
    fn identity_and_relabel() {
        let one = |t: &Nft, w: &str| t.outputs(&word(w), 10).unwrap();
        assert_eq!(one(&identity(), "ab"), BTreeSet::from([word("ab")]));
        let mut r = Nft::new();
        let s = r.add_state(true);
        r.initial.push(s);
        r.add(s, 'a' as u32, 'a' as u32, s, lit_output(&word("b")));
        assert_eq!(one(&r, "aa"), BTreeSet::from([word("bb")]));
        assert!(one(&r, "c").is_empty());
    }

    #[test]
    fn epsilon_removal_preserves_outputs() {
        // x -> "<" eps, then copy a*, then eps ">" to final
        let mut t = Nft::new();
        let s0 = t.add_state(false);
        let s1 = t.add_state(false);
        let s2 = t.add_state(true);
        t.initial.push(s0);
        t.add_eps(s0, s1, lit_output(&word("<")));
        t.add(s1, 'a' as u32, 'b' as u32, s1, vec![OutItem::Copy, OutItem::Copy]);
        t.add_eps(s1, s2, lit_output(&word(">")));
        t.add_eps(s1, s1, vec![]);
        let e = t.remove_epsilon();
        for w in ["", "a", "ab", "ba", "c"] {
            assert_eq!(
                t.outputs(&word(w), 10).unwrap(),
                e.outputs(&word(w), 10).unwrap(),
                "{w}"
            );
        }
        assert_eq!(e.empty_outputs(), BTreeSet::from([word("<>")]));
    }

    #[test]
    fn overflow_is_reported() {
        let mut t = Nft::new();
        let s = t.add_state(true);
        t.initial.push(s);
        t.add(s, 'a' as u32, 'a' as u32, s, lit_output(&word("x")));
        t.add(s, 'a' as u32, 'a' as u32, s, lit_output(&word("y")));
        assert_eq!(t.outputs(&word("aaa"), 4), Err(NftError::OutputOverflow(4)));
    }
}
