//! Helpers shared by the integration tests: enumeration, random automata
//! and regexes, and a direct evaluation of pre-image alternatives.

#![allow(dead_code)]

use rand::Rng;
use seqstr::alphabet::{Sym, Word, SEP};
use seqstr::cefa::Cefa;
use seqstr::lia::Model;
use seqstr::preimage::PreimageAlternative;
use seqstr::regex::Regex;
use std::collections::BTreeSet;

pub const A: Sym = 'a' as Sym;
pub const B: Sym = 'b' as Sym;
pub const AB: [Sym; 2] = [A, B];
pub const ABS: [Sym; 3] = [A, B, SEP];

/// All words over `alpha` of length at most `max`, shortest first.
pub fn words(alpha: &[Sym], max: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Word> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for &c in alpha {
                let mut v = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// A trim-free random automaton with `k` registers named `r0..`, at most
/// `max_states` states, transitions on single symbols of `alpha` and
/// updates drawn from `upd`.
pub fn random_cefa(rng: &mut impl Rng, max_states: usize, k: usize, alpha: &[Sym], upd: (i64, i64)) -> Cefa {
    let mut c = Cefa::new((0..k).map(|i| format!("r{i}")).collect());
    let n = rng.gen_range(1..=max_states);
    for _ in 0..n {
        let f = rng.gen_bool(0.4);
        c.add_state(f);
    }
    if !c.finals.iter().any(|&f| f) {
        let s = rng.gen_range(0..n);
        c.finals[s] = true;
    }
    c.initial.push(0);
    if n > 1 && rng.gen_bool(0.2) {
        c.initial.push(rng.gen_range(1..n));
    }
    for s in 0..n {
        for &sym in alpha {
            for _ in 0..2 {
                if rng.gen_bool(0.35) {
                    let d = rng.gen_range(0..n);
                    let v = (0..k).map(|_| rng.gen_range(upd.0..=upd.1)).collect();
                    c.add_trans(s, sym, sym, d, v);
                }
            }
        }
    }
    c
}

/// Random regex over `{a, b}` of depth at most `depth`.
pub fn random_ab_regex(rng: &mut impl Rng, depth: u32) -> Regex {
    let leaf = |rng: &mut dyn rand::RngCore| match rng.gen_range(0..3) {
        0 => Regex::chr('a'),
        1 => Regex::chr('b'),
        _ => Regex::range(A, B).unwrap(),
    };
    if depth <= 1 {
        return leaf(rng);
    }
    match rng.gen_range(0..4) {
        0 => leaf(rng),
        1 => Regex::concat(random_ab_regex(rng, depth - 1), random_ab_regex(rng, depth - 1)),
        2 => Regex::union(random_ab_regex(rng, depth - 1), random_ab_regex(rng, depth - 1)),
        _ => Regex::star(random_ab_regex(rng, depth - 1)),
    }
}

/// Values of `reg` in `range` for which some alternative admits `args`,
/// with the remaining free variables taken from `env`.
pub fn admitted_values(
    alts: &[PreimageAlternative],
    args: &[&[Sym]],
    env: &Model,
    reg: &str,
    range: std::ops::RangeInclusive<i64>,
) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    for alt in alts {
        let mut partial: Vec<Model> = vec![env.clone()];
        for (c, w) in alt.args.iter().zip(args) {
            let costs = c.accepts_with_cost(w).expect("small costs");
            let mut next = Vec::new();
            for m in &partial {
                for v in &costs {
                    let mut m = m.clone();
                    m.extend(c.registers.iter().cloned().zip(v.iter().copied()));
                    next.push(m);
                }
            }
            partial = next;
        }
        for m in partial {
            // unary pre-images may keep the register of the target automaton
            if let Some(&v) = m.get(reg) {
                if range.contains(&v) && alt.constraint.eval(&m).expect("all variables bound") {
                    out.insert(v);
                }
                continue;
            }
            for v in range.clone() {
                let mut m = m.clone();
                m.insert(reg.to_string(), v);
                if alt.constraint.eval(&m).expect("all variables bound") {
                    out.insert(v);
                }
            }
        }
    }
    out
}

/// The register values of accepting runs of a one-register automaton.
pub fn costs_1(a: &Cefa, w: &[Sym]) -> BTreeSet<i64> {
    a.accepts_with_cost(w).expect("small costs").into_iter().map(|v| v[0]).collect()
}

/// A small random straight-line script over `{a, b}`. Every definition
/// introduces a new variable from existing ones, so the script is acyclic.
/// Sources are limited so that bounded enumeration with bounds (3, 3) stays
/// cheap.
pub fn random_script(rng: &mut impl Rng) -> String {
    struct Gen {
        decls: String,
        body: String,
        strs: Vec<String>,
        seqs: Vec<String>,
        ints: Vec<String>,
        fresh: usize,
        /// Product of the enumeration domain sizes of the sources so far.
        cost: u64,
    }
    const BUDGET: u64 = 60_000;
    // domain sizes under bounds (3, 3) over two letters
    const STR_DOM: u64 = 15;
    const SEQ_DOM: u64 = 3616;
    const INT_DOM: u64 = 7;

    impl Gen {
        fn name(&mut self, p: &str) -> String {
            self.fresh += 1;
            format!("{p}{}", self.fresh)
        }
        fn declare(&mut self, v: &str, sort: &str) {
            self.decls.push_str(&format!("(declare-fun {v} () {sort})\n"));
        }
        fn str_arg(&mut self, rng: &mut impl Rng) -> String {
            if self.strs.is_empty() || (self.cost * STR_DOM <= BUDGET && rng.gen_bool(0.3)) {
                let v = self.name("x");
                self.declare(&v, "String");
                self.cost *= STR_DOM;
                self.strs.push(v.clone());
                return v;
            }
            self.strs[rng.gen_range(0..self.strs.len())].clone()
        }
        fn seq_arg(&mut self, rng: &mut impl Rng) -> Option<String> {
            if !self.seqs.is_empty() && (self.cost * SEQ_DOM > BUDGET || rng.gen_bool(0.7)) {
                return Some(self.seqs[rng.gen_range(0..self.seqs.len())].clone());
            }
            if self.cost * SEQ_DOM > BUDGET {
                return None;
            }
            let v = self.name("s");
            self.declare(&v, "(Seq String)");
            self.cost *= SEQ_DOM;
            self.seqs.push(v.clone());
            Some(v)
        }
        fn index(&mut self, rng: &mut impl Rng) -> String {
            if rng.gen_bool(0.3) {
                if let Some(i) = self.ints.first() {
                    return i.clone();
                }
                if self.cost * INT_DOM <= BUDGET {
                    let v = self.name("i");
                    self.declare(&v, "Int");
                    self.cost *= INT_DOM;
                    self.ints.push(v.clone());
                    return v;
                }
            }
            rng.gen_range(0..=2).to_string()
        }
        fn define(&mut self, p: &str, sort: &str, term: String) -> String {
            let v = self.name(p);
            self.declare(&v, sort);
            self.body.push_str(&format!("(assert (= {v} {term}))\n"));
            v
        }
    }

    let mut g = Gen {
        decls: String::new(),
        body: String::new(),
        strs: Vec::new(),
        seqs: Vec::new(),
        ints: Vec::new(),
        fresh: 0,
        cost: 1,
    };
    let lit = |rng: &mut dyn rand::RngCore| ["\"\"", "\"a\"", "\"b\"", "\"ab\""][rng.gen_range(0..4)];
    let ops = rng.gen_range(1..=3);
    for _ in 0..ops {
        let kind = rng.gen_range(0..10);
        match kind {
            0 => {
                let (a, b) = (g.str_arg(rng), g.str_arg(rng));
                let v = g.define("z", "String", format!("(str.++ {a} {b})"));
                g.strs.push(v);
            }
            1 => {
                let a = g.str_arg(rng);
                let t = if rng.gen_bool(0.5) {
                    format!("(seq.unit {a})")
                } else {
                    let b = g.str_arg(rng);
                    format!("(seq.++ (seq.unit {a}) (seq.unit {b}))")
                };
                let v = g.define("t", "(Seq String)", t);
                g.seqs.push(v);
            }
            2 | 3 => {
                let Some(s) = g.seq_arg(rng) else { continue };
                let i = g.index(rng);
                let v = g.define("z", "String", format!("(seq.nth {s} {i})"));
                g.strs.push(v);
            }
            4 => {
                let Some(s) = g.seq_arg(rng) else { continue };
                let i = g.index(rng);
                let u = g.str_arg(rng);
                let v = g.define("t", "(Seq String)", format!("(seq.update {s} {i} {u})"));
                g.seqs.push(v);
            }
            5 => {
                let Some(s) = g.seq_arg(rng) else { continue };
                let (i, j) = (g.index(rng), rng.gen_range(0..=2));
                let v = g.define("t", "(Seq String)", format!("(seq.extract {s} {i} {j})"));
                g.seqs.push(v);
            }
            6 => {
                let u = g.str_arg(rng);
                let e = random_ab_regex(rng, 2).to_smtlib();
                let op = if rng.gen_bool(0.5) { "str.splitre" } else { "str.matchall" };
                let v = g.define("t", "(Seq String)", format!("({op} {u} {e})"));
                g.seqs.push(v);
            }
            7 => {
                let Some(s) = g.seq_arg(rng) else { continue };
                let sep = lit(rng);
                let v = g.define("z", "String", format!("(seq.join {s} {sep})"));
                g.strs.push(v);
            }
            8 => {
                let Some(s) = g.seq_arg(rng) else { continue };
                let e = random_ab_regex(rng, 2).to_smtlib();
                let v = g.define("t", "(Seq String)", format!("(seq.filterre {s} {e})"));
                g.seqs.push(v);
            }
            _ => {
                let (Some(s), Some(t)) = (g.seq_arg(rng), g.seq_arg(rng)) else { continue };
                let v = g.define("t", "(Seq String)", format!("(seq.++ {s} {t})"));
                g.seqs.push(v);
            }
        }
    }
    let rels = ["<", "<=", "=", ">=", ">"];
    for _ in 0..rng.gen_range(1..=3) {
        let rel = rels[rng.gen_range(0..rels.len())];
        let c = rng.gen_range(0..=4);
        let atom = match rng.gen_range(0..4) {
            0 if !g.strs.is_empty() => {
                let x = &g.strs[rng.gen_range(0..g.strs.len())];
                format!("(str.in_re {x} {})", random_ab_regex(rng, 2).to_smtlib())
            }
            1 if !g.strs.is_empty() => {
                let x = &g.strs[rng.gen_range(0..g.strs.len())];
                format!("({rel} (str.len {x}) {c})")
            }
            2 if !g.seqs.is_empty() => {
                let s = &g.seqs[rng.gen_range(0..g.seqs.len())];
                format!("({rel} (seq.len {s}) {c})")
            }
            3 if !g.seqs.is_empty() && !g.strs.is_empty() => {
                let s = &g.seqs[rng.gen_range(0..g.seqs.len())];
                let x = &g.strs[rng.gen_range(0..g.strs.len())];
                format!("({rel} (seq.len {s}) (str.len {x}))")
            }
            _ => continue,
        };
        g.body.push_str(&format!("(assert {atom})\n"));
    }
    if let Some(i) = g.ints.first() {
        g.body.push_str(&format!("(assert (<= 0 {i}))\n"));
    }
    format!("{}{}", g.decls, g.body)
}
