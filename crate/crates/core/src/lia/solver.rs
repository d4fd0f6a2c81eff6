//! Normalisation, equality elimination, and lazy case splitting on top of the
//! simplex core.

use super::simplex::{solve_ilp, Budget, IlpResult, Problem};
use super::{LiaError, LiaFormula, LiaResult, LinExpr, Model, Rel, Var};
use num_integer::Integer;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct Limits {
    /// Simplex nodes (branch-and-bound and case splits) per query.
    pub max_nodes: usize,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            max_nodes: 200_000,
            deadline: None,
        }
    }
}

/// `expr = 0` or `expr <= 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Atom {
    expr: LinExpr,
    eq: bool,
}

#[derive(Clone, Debug)]
enum Nnf {
    True,
    False,
    Atom(Atom),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn cmp_to_nnf(a: &LinExpr, r: Rel, b: &LinExpr) -> Nnf {
    let e = a.sub(b);
    let le = |x: LinExpr| Nnf::Atom(Atom { expr: x, eq: false });
    match r {
        Rel::Le => le(e),
        Rel::Lt => le(e.plus_const(1)),
        Rel::Ge => le(e.scale(-1)),
        Rel::Gt => le(e.scale(-1).plus_const(1)),
        Rel::Eq => Nnf::Atom(Atom { expr: e, eq: true }),
        Rel::Ne => Nnf::Or(vec![le(e.plus_const(1)), le(e.scale(-1).plus_const(1))]),
    }
}

fn to_nnf(f: &LiaFormula, positive: bool) -> Nnf {
    match (f, positive) {
        (LiaFormula::True, true) | (LiaFormula::False, false) => Nnf::True,
        (LiaFormula::True, false) | (LiaFormula::False, true) => Nnf::False,
        (LiaFormula::Cmp(a, r, b), true) => cmp_to_nnf(a, *r, b),
        (LiaFormula::Cmp(a, r, b), false) => cmp_to_nnf(a, r.negate(), b),
        (LiaFormula::And(fs), true) | (LiaFormula::Or(fs), false) => {
            Nnf::And(fs.iter().map(|g| to_nnf(g, positive)).collect())
        }
        (LiaFormula::Or(fs), true) | (LiaFormula::And(fs), false) => {
            Nnf::Or(fs.iter().map(|g| to_nnf(g, positive)).collect())
        }
        (LiaFormula::Not(g), p) => to_nnf(g, !p),
    }
}

/// Normalises an atom: constant atoms become `Some(true/false)`, others are
/// divided by the gcd of their coefficients (tightening `<=` constants).
fn normalize(a: &Atom) -> Result<Atom, bool> {
    if a.expr.is_constant() {
        let c = a.expr.constant;
        return Err(if a.eq { c == 0 } else { c <= 0 });
    }
    let g = a.expr.coeffs.values().fold(0i64, |g, &c| g.gcd(&c));
    if g <= 1 {
        return Ok(a.clone());
    }
    let c = a.expr.constant;
    let constant = if a.eq {
        if c % g != 0 {
            return Err(false);
        }
        c / g
    } else {
        // sum(a/g x) + c/g <= 0 over integers  <=>  sum(a/g x) + ceil(c/g) <= 0
        Integer::div_ceil(&c, &g)
    };
    Ok(Atom {
        expr: LinExpr {
            coeffs: a.expr.coeffs.iter().map(|(v, k)| (v.clone(), k / g)).collect(),
            constant,
        },
        eq: a.eq,
    })
}

fn atom_holds(a: &Atom, m: &Model) -> bool {
    let v = eval_default(&a.expr, m);
    if a.eq {
        v == 0
    } else {
        v <= 0
    }
}

fn eval_default(e: &LinExpr, m: &Model) -> i128 {
    let mut acc = e.constant as i128;
    for (v, c) in &e.coeffs {
        acc += *c as i128 * *m.get(v).unwrap_or(&0) as i128;
    }
    acc
}

fn nnf_holds(f: &Nnf, m: &Model) -> bool {
    match f {
        Nnf::True => true,
        Nnf::False => false,
        Nnf::Atom(a) => atom_holds(a, m),
        Nnf::And(fs) => fs.iter().all(|g| nnf_holds(g, m)),
        Nnf::Or(fs) => fs.iter().any(|g| nnf_holds(g, m)),
    }
}

fn violated_atoms(f: &Nnf, m: &Model) -> usize {
    match f {
        Nnf::True => 0,
        Nnf::False => 1_000,
        Nnf::Atom(a) => usize::from(!atom_holds(a, m)),
        Nnf::And(fs) => fs.iter().map(|g| violated_atoms(g, m)).sum(),
        Nnf::Or(fs) => fs.iter().map(|g| violated_atoms(g, m)).min().unwrap_or(1_000),
    }
}

/// Splits a formula into unit atoms and residual disjunctions. Returns false
/// if it contains a top-level `False`.
fn flatten(f: Nnf, units: &mut Vec<Atom>, clauses: &mut Vec<Nnf>) -> bool {
    match f {
        Nnf::True => true,
        Nnf::False => false,
        Nnf::Atom(a) => {
            units.push(a);
            true
        }
        Nnf::And(fs) => fs.into_iter().all(|g| flatten(g, units, clauses)),
        Nnf::Or(fs) => {
            let fs: Vec<Nnf> = fs.into_iter().filter(|g| !matches!(g, Nnf::False)).collect();
            if fs.iter().any(|g| matches!(g, Nnf::True)) {
                return true;
            }
            match fs.len() {
                0 => false,
                1 => flatten(fs.into_iter().next().unwrap(), units, clauses),
                _ => {
                    clauses.push(Nnf::Or(fs));
                    true
                }
            }
        }
    }
}

/// Outcome of a search under a branch-and-bound depth limit.
enum Found {
    Sat(Model),
    Unsat,
    /// Inconclusive: some subproblem hit the depth limit.
    Open,
}

/// Depth limit of the first round; it doubles after every inconclusive round.
const INITIAL_DEPTH: usize = 16;

pub(crate) fn solve(f: &LiaFormula, limits: &Limits) -> Result<LiaResult, LiaError> {
    let mut free = BTreeSet::new();
    f.free_vars(&mut free);
    let mut units = Vec::new();
    let mut clauses = Vec::new();
    if !flatten(to_nnf(f, true), &mut units, &mut clauses) {
        return Ok(LiaResult::Unsat);
    }
    let mut budget = Budget {
        nodes: limits.max_nodes,
        deadline: limits.deadline,
        depth: INITIAL_DEPTH,
    };
    loop {
        match search(units.clone(), clauses.clone(), &mut budget)? {
            Found::Unsat => return Ok(LiaResult::Unsat),
            Found::Open => budget.depth = budget.depth.saturating_mul(2),
            Found::Sat(mut m) => {
                for v in free {
                    m.entry(v).or_insert(0);
                }
                debug_assert!(f.eval(&m) == Ok(true), "model does not satisfy formula");
                return Ok(LiaResult::Sat(m));
            }
        }
    }
}

fn search(units: Vec<Atom>, clauses: Vec<Nnf>, budget: &mut Budget) -> Result<Found, LiaError> {
    let model = match solve_units(&units, budget)? {
        Found::Sat(m) => m,
        other => return Ok(other),
    };
    let Some(idx) = clauses.iter().position(|c| !nnf_holds(c, &model)) else {
        return Ok(Found::Sat(model));
    };
    let Nnf::Or(disjuncts) = &clauses[idx] else {
        unreachable!("clauses are disjunctions")
    };
    let mut order: Vec<&Nnf> = disjuncts.iter().collect();
    order.sort_by_key(|d| violated_atoms(d, &model));
    let mut open = false;
    for d in order {
        let mut u = units.clone();
        let mut cl: Vec<Nnf> = clauses
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != idx)
            .map(|(_, c)| c.clone())
            .collect();
        if !flatten(d.clone(), &mut u, &mut cl) {
            continue;
        }
        match search(u, cl, budget)? {
            Found::Sat(m) => return Ok(Found::Sat(m)),
            Found::Open => open = true,
            Found::Unsat => {}
        }
    }
    Ok(if open { Found::Open } else { Found::Unsat })
}

/// Solves a conjunction of atoms. A model covers all variables mentioned.
fn solve_units(units: &[Atom], budget: &mut Budget) -> Result<Found, LiaError> {
    let mut work: Vec<Atom> = Vec::with_capacity(units.len());
    let mut all_vars: BTreeSet<Var> = BTreeSet::new();
    for a in units {
        all_vars.extend(a.expr.vars().cloned());
        match normalize(a) {
            Err(true) => {}
            Err(false) => return Ok(Found::Unsat),
            Ok(n) => work.push(n),
        }
    }
    // Eliminate all equalities. A unit coefficient is solved for directly;
    // otherwise the smallest coefficient is reduced by a fresh variable, so
    // divisibility conflicts are found here rather than by branching.
    let mut elim: Vec<(Var, LinExpr)> = Vec::new();
    let mut fresh: Vec<Var> = Vec::new();
    loop {
        let pick = work
            .iter()
            .position(|a| a.eq && a.expr.coeffs.values().any(|c| c.abs() == 1))
            .or_else(|| work.iter().position(|a| a.eq));
        let Some(i) = pick else { break };
        let mut a = work.swap_remove(i);
        // each pass either eliminates a variable with a unit coefficient or
        // strictly lowers the smallest coefficient of `a`
        loop {
            let (v, c) = a
                .expr
                .coeffs
                .iter()
                .min_by_key(|(_, c)| c.abs())
                .map(|(v, c)| (v.clone(), *c))
                .expect("normalised atoms have variables");
            let unit = c.abs() == 1;
            let t = if unit {
                // c*v + rest = 0  ->  v = -rest / c
                let mut rest = a.expr.clone();
                rest.coeffs.remove(&v);
                rest.scale(-c)
            } else {
                // m*v + sum(a_i x_i) + k = 0 with m = |c| > 1: write
                // v = q - sum(floor(a_i/m) x_i) - floor(k/m) for a fresh q
                let e = if c < 0 { a.expr.scale(-1) } else { a.expr.clone() };
                let m = c.abs();
                let mut name = format!("#lia{}", fresh.len());
                while all_vars.contains(&name) {
                    name.push('\'');
                }
                let mut t = LinExpr::var(name.clone());
                for (x, k) in &e.coeffs {
                    if *x != v {
                        t.add_term(x, -Integer::div_floor(k, &m));
                    }
                }
                fresh.push(name);
                t.plus_const(-Integer::div_floor(&e.constant, &m))
            };
            let mut next = Vec::with_capacity(work.len());
            for b in work.drain(..) {
                let s = Atom {
                    expr: b.expr.substitute(&v, &t),
                    eq: b.eq,
                };
                match normalize(&s) {
                    Err(true) => {}
                    Err(false) => return Ok(Found::Unsat),
                    Ok(n) => next.push(n),
                }
            }
            work = next;
            elim.push((v.clone(), t.clone()));
            if unit {
                break;
            }
            let reduced = Atom {
                expr: a.expr.substitute(&v, &t),
                eq: true,
            };
            match normalize(&reduced) {
                Err(true) => break,
                Err(false) => return Ok(Found::Unsat),
                Ok(n) => a = n,
            }
        }
    }
    work.sort();
    work.dedup();

    let mut model: Model = Model::new();
    let mut open = false;
    for comp in components(&work) {
        match solve_component(&comp, budget)? {
            Found::Unsat => return Ok(Found::Unsat),
            Found::Open => open = true,
            Found::Sat(m) => model.extend(m),
        }
    }
    if open {
        return Ok(Found::Open);
    }
    for (v, t) in elim.iter().rev() {
        for x in t.vars() {
            model.entry(x.clone()).or_insert(0);
        }
        let val = t.eval(&model)?;
        model.insert(v.clone(), val);
    }
    for v in all_vars {
        model.entry(v).or_insert(0);
    }
    for v in &fresh {
        model.remove(v);
    }
    Ok(Found::Sat(model))
}

fn components(atoms: &[Atom]) -> Vec<Vec<Atom>> {
    let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
    fn find<'a>(p: &mut BTreeMap<&'a str, &'a str>, x: &'a str) -> &'a str {
        let mut r = x;
        while let Some(&q) = p.get(r) {
            if q == r {
                break;
            }
            r = q;
        }
        p.insert(x, r);
        r
    }
    for a in atoms {
        let mut vs = a.expr.vars();
        if let Some(first) = vs.next() {
            parent.entry(first.as_str()).or_insert(first.as_str());
            for v in vs {
                parent.entry(v.as_str()).or_insert(v.as_str());
                let r1 = find(&mut parent, first);
                let r2 = find(&mut parent, v);
                if r1 != r2 {
                    parent.insert(r1, r2);
                }
            }
        }
    }
    let mut groups: BTreeMap<&str, Vec<Atom>> = BTreeMap::new();
    for a in atoms {
        let first = a.expr.vars().next().unwrap();
        let r = find(&mut parent, first);
        groups.entry(r).or_default().push(a.clone());
    }
    groups.into_values().collect()
}

fn solve_component(atoms: &[Atom], budget: &mut Budget) -> Result<Found, LiaError> {
    let vars: Vec<Var> = atoms
        .iter()
        .flat_map(|a| a.expr.vars().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut p = Problem {
        nvars: vars.len(),
        rows: Vec::new(),
        lower: vec![None; vars.len()],
        upper: vec![None; vars.len()],
    };
    // rows keyed by linear form so that bounds on the same form share a slack
    let mut forms: BTreeMap<Vec<(usize, i64)>, (Option<i64>, Option<i64>)> = BTreeMap::new();
    for a in atoms {
        let mut coeffs: Vec<(usize, i64)> = a.expr.coeffs.iter().map(|(v, c)| (index[v.as_str()], *c)).collect();
        coeffs.sort();
        // sum + k (<=|=) 0  ->  sum (<=|=) -k
        let mut bound = -a.expr.constant;
        let mut flip = false;
        if coeffs[0].1 < 0 {
            for c in coeffs.iter_mut() {
                c.1 = -c.1;
            }
            bound = -bound;
            flip = true;
        }
        let (lo, hi) = if a.eq {
            (Some(bound), Some(bound))
        } else if flip {
            (Some(bound), None)
        } else {
            (None, Some(bound))
        };
        if coeffs.len() == 1 && coeffs[0].1 == 1 {
            let x = coeffs[0].0;
            if let Some(l) = lo {
                p.lower[x] = Some(p.lower[x].map_or(l, |o| o.max(l)));
            }
            if let Some(h) = hi {
                p.upper[x] = Some(p.upper[x].map_or(h, |o| o.min(h)));
            }
            continue;
        }
        let e = forms.entry(coeffs).or_insert((None, None));
        if let Some(l) = lo {
            e.0 = Some(e.0.map_or(l, |o: i64| o.max(l)));
        }
        if let Some(h) = hi {
            e.1 = Some(e.1.map_or(h, |o: i64| o.min(h)));
        }
    }
    p.rows = forms.into_iter().map(|(c, (l, h))| (c, l, h)).collect();
    match solve_ilp(&p, budget)? {
        IlpResult::Unsat => Ok(Found::Unsat),
        IlpResult::Truncated => Ok(Found::Open),
        IlpResult::Sat(vals) => {
            let mut m = Model::new();
            for (v, x) in vars.into_iter().zip(vals) {
                let x: i64 = (&x).try_into().map_err(|_| LiaError::Overflow)?;
                m.insert(v, x);
            }
            Ok(Found::Sat(m))
        }
    }
}
