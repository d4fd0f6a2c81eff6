//! Exact bounded-variable simplex (Bland's rule) with branch-and-bound and
//! Gomory mixed-integer cuts.

use super::LiaError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::time::Instant;

type Q = BigRational;

/// `lo <= sum(coeff * x) <= hi` over integer variables `0..nvars`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Problem {
    pub nvars: usize,
    pub rows: Vec<(Vec<(usize, i64)>, Option<i64>, Option<i64>)>,
    pub lower: Vec<Option<i64>>,
    pub upper: Vec<Option<i64>>,
}

pub(crate) struct Budget {
    pub nodes: usize,
    pub deadline: Option<Instant>,
    /// Splits plus cuts allowed along one branch-and-bound path.
    pub depth: usize,
}

impl Budget {
    fn tick(&mut self) -> Result<(), LiaError> {
        if self.nodes == 0 || super::expired(self.deadline) {
            return Err(LiaError::ResourceLimit);
        }
        self.nodes -= 1;
        Ok(())
    }
}

#[derive(Clone)]
struct Tableau {
    rows: Vec<BTreeMap<usize, Q>>,
    basic: Vec<usize>,
    pos: Vec<Option<usize>>,
    lo: Vec<Option<Q>>,
    hi: Vec<Option<Q>>,
    val: Vec<Q>,
    /// Variables below this index are integral; cut slacks are not.
    int_limit: usize,
    cuts: usize,
}

/// Cuts added along one branch before falling back to splitting only.
const MAX_CUTS: usize = 8;

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

impl Tableau {
    fn new(p: &Problem) -> Tableau {
        let n = p.nvars + p.rows.len();
        let mut t = Tableau {
            rows: Vec::with_capacity(p.rows.len()),
            basic: Vec::with_capacity(p.rows.len()),
            pos: vec![None; n],
            lo: vec![None; n],
            hi: vec![None; n],
            val: vec![Q::zero(); n],
            int_limit: n,
            cuts: 0,
        };
        for x in 0..p.nvars {
            t.lo[x] = p.lower[x].map(q);
            t.hi[x] = p.upper[x].map(q);
            let v = match (&t.lo[x], &t.hi[x]) {
                (Some(l), _) if l.is_positive() => l.clone(),
                (_, Some(h)) if h.is_negative() => h.clone(),
                _ => Q::zero(),
            };
            t.val[x] = v;
        }
        for (r, (coeffs, lo, hi)) in p.rows.iter().enumerate() {
            let s = p.nvars + r;
            let mut row = BTreeMap::new();
            let mut v = Q::zero();
            for &(x, c) in coeffs {
                let c = q(c);
                v += &c * &t.val[x];
                *row.entry(x).or_insert_with(Q::zero) += c;
            }
            row.retain(|_, c: &mut Q| !c.is_zero());
            t.rows.push(row);
            t.basic.push(s);
            t.pos[s] = Some(r);
            t.lo[s] = lo.map(q);
            t.hi[s] = hi.map(q);
            t.val[s] = v;
        }
        t
    }

    fn below(&self, x: usize) -> bool {
        self.lo[x].as_ref().is_some_and(|l| self.val[x] < *l)
    }

    fn above(&self, x: usize) -> bool {
        self.hi[x].as_ref().is_some_and(|h| self.val[x] > *h)
    }

    fn can_increase(&self, x: usize) -> bool {
        self.hi[x].as_ref().map_or(true, |h| self.val[x] < *h)
    }

    fn can_decrease(&self, x: usize) -> bool {
        self.lo[x].as_ref().map_or(true, |l| self.val[x] > *l)
    }

    /// Moves nonbasic `x` to `v`, updating basic values.
    fn update(&mut self, x: usize, v: Q) {
        let delta = &v - &self.val[x];
        for r in 0..self.rows.len() {
            if let Some(a) = self.rows[r].get(&x) {
                let b = self.basic[r];
                self.val[b] = &self.val[b] + a * &delta;
            }
        }
        self.val[x] = v;
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let xi = self.basic[r];
        let mut row = std::mem::take(&mut self.rows[r]);
        let a = row.remove(&j).expect("pivot on zero coefficient");
        let inv = Q::one() / &a;
        // x_j = (x_i - sum_{k != j} a_k x_k) / a
        let mut new_row: BTreeMap<usize, Q> = BTreeMap::new();
        new_row.insert(xi, inv.clone());
        for (k, c) in row {
            new_row.insert(k, -(c * &inv));
        }
        for k in 0..self.rows.len() {
            if k == r {
                continue;
            }
            if let Some(c) = self.rows[k].remove(&j) {
                for (v, d) in &new_row {
                    let e = self.rows[k].entry(*v).or_insert_with(Q::zero);
                    *e += &c * d;
                    if e.is_zero() {
                        self.rows[k].remove(v);
                    }
                }
            }
        }
        self.rows[r] = new_row;
        self.basic[r] = j;
        self.pos[j] = Some(r);
        self.pos[xi] = None;
    }

    fn pivot_and_update(&mut self, r: usize, j: usize, v: Q) {
        let xi = self.basic[r];
        let a = self.rows[r][&j].clone();
        let theta = (&v - &self.val[xi]) / &a;
        self.val[xi] = v;
        self.val[j] = &self.val[j] + &theta;
        for k in 0..self.rows.len() {
            if k == r {
                continue;
            }
            if let Some(c) = self.rows[k].get(&j) {
                let b = self.basic[k];
                self.val[b] = &self.val[b] + c * &theta;
            }
        }
        self.pivot(r, j);
    }

    /// Restores feasibility of basic variables; false when infeasible.
    fn check(&mut self, budget: &mut Budget) -> Result<bool, LiaError> {
        let mut iters: u64 = 0;
        loop {
            iters += 1;
            if iters % 64 == 0 && super::expired(budget.deadline) {
                return Err(LiaError::ResourceLimit);
            }
            // Bland: smallest violating basic variable
            let mut pick: Option<(usize, usize)> = None;
            for (r, &b) in self.basic.iter().enumerate() {
                if (self.below(b) || self.above(b)) && pick.map_or(true, |(_, pb)| b < pb) {
                    pick = Some((r, b));
                }
            }
            let Some((r, xi)) = pick else {
                return Ok(true);
            };
            let increase = self.below(xi);
            let mut entering: Option<usize> = None;
            for (&j, a) in &self.rows[r] {
                let ok = if increase == a.is_positive() {
                    self.can_increase(j)
                } else {
                    self.can_decrease(j)
                };
                if ok && entering.map_or(true, |e| j < e) {
                    entering = Some(j);
                }
            }
            let Some(j) = entering else {
                return Ok(false);
            };
            let target = if increase {
                self.lo[xi].clone().unwrap()
            } else {
                self.hi[xi].clone().unwrap()
            };
            self.pivot_and_update(r, j, target);
        }
    }

    fn set_upper(&mut self, x: usize, v: Q) {
        self.hi[x] = Some(v.clone());
        if self.pos[x].is_none() && self.val[x] > v {
            self.update(x, v);
        }
    }

    fn set_lower(&mut self, x: usize, v: Q) {
        self.lo[x] = Some(v.clone());
        if self.pos[x].is_none() && self.val[x] < v {
            self.update(x, v);
        }
    }

    /// A Gomory mixed-integer cut violated by the current vertex, derived
    /// from the row of a fractional integral basic variable whose nonbasic
    /// variables all sit at a bound. Returns `(coeffs, lower)` for
    /// `sum(coeffs * x) >= lower`.
    fn gomory_cut(&self) -> Option<(BTreeMap<usize, Q>, Q)> {
        'rows: for (r, &b) in self.basic.iter().enumerate() {
            if b >= self.int_limit || self.val[b].is_integer() {
                continue;
            }
            // b = val(b) + sum(abar_j y_j) with y_j >= 0 the distance of x_j
            // from its active bound
            // fract() truncates towards zero; the cut needs b - floor(b)
            let f0 = &self.val[b] - self.val[b].floor();
            let one = Q::one();
            let mut coeffs = BTreeMap::new();
            let mut rhs = Q::one();
            for (&j, a) in &self.rows[r] {
                let at_lo = self.lo[j].as_ref().filter(|l| **l == self.val[j]);
                let at_hi = self.hi[j].as_ref().filter(|h| **h == self.val[j]);
                let (bound, from_lo) = match (at_lo, at_hi) {
                    (Some(l), _) => (l.clone(), true),
                    (None, Some(h)) => (h.clone(), false),
                    (None, None) => continue 'rows,
                };
                let abar = if from_lo { a.clone() } else { -a };
                let c = -abar.clone();
                let g = if j < self.int_limit {
                    let fj = &c - c.floor();
                    if fj <= f0 {
                        fj / &f0
                    } else {
                        (&one - fj) / (&one - &f0)
                    }
                } else if c.is_positive() {
                    c / &f0
                } else {
                    -c / (&one - &f0)
                };
                if g.is_zero() {
                    continue;
                }
                // g*y_j: y_j = x_j - l  or  y_j = h - x_j
                if from_lo {
                    rhs += &g * &bound;
                    coeffs.insert(j, g);
                } else {
                    rhs -= &g * &bound;
                    coeffs.insert(j, -g);
                }
            }
            if coeffs.is_empty() {
                continue;
            }
            return Some((coeffs, rhs));
        }
        None
    }

    fn add_cut(&mut self, coeffs: BTreeMap<usize, Q>, lower: Q) {
        let s = self.val.len();
        let v = coeffs.iter().map(|(j, c)| c * &self.val[*j]).sum();
        self.rows.push(coeffs);
        self.basic.push(s);
        self.pos.push(Some(self.rows.len() - 1));
        self.lo.push(Some(lower));
        self.hi.push(None);
        self.val.push(v);
        self.cuts += 1;
    }

    fn bounds_consistent(&self, x: usize) -> bool {
        match (&self.lo[x], &self.hi[x]) {
            (Some(l), Some(h)) => l <= h,
            _ => true,
        }
    }
}

pub(crate) enum IlpResult {
    Sat(Vec<BigInt>),
    Unsat,
    /// No integer point found, but some paths reached the depth limit.
    Truncated,
}

/// Decides integer feasibility of `p`.
pub(crate) fn solve_ilp(p: &Problem, budget: &mut Budget) -> Result<IlpResult, LiaError> {
    for x in 0..p.nvars {
        if let (Some(l), Some(h)) = (p.lower[x], p.upper[x]) {
            if l > h {
                return Ok(IlpResult::Unsat);
            }
        }
    }
    for (_, lo, hi) in &p.rows {
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return Ok(IlpResult::Unsat);
            }
        }
    }
    let t = Tableau::new(p);
    Ok(match branch(t, p.nvars, budget)? {
        IlpResult::Sat(vals) => IlpResult::Sat(vals[..p.nvars].to_vec()),
        other => other,
    })
}

/// Depth-first branch-and-bound with an explicit stack. Paths longer than
/// `budget.depth` are dropped and reported through `Truncated`, so that a
/// divergent subtree cannot hide a solution in its sibling.
fn branch(t: Tableau, nvars: usize, budget: &mut Budget) -> Result<IlpResult, LiaError> {
    let mut stack = vec![(t, 0usize)];
    let mut truncated = false;
    while let Some((mut t, depth)) = stack.pop() {
        budget.tick()?;
        if !t.check(budget)? {
            continue;
        }

        let Some(x) = (0..nvars).find(|&x| !t.val[x].is_integer()) else {
            return Ok(IlpResult::Sat(t.val.iter().map(|v| v.to_integer()).collect()));
        };
        if depth >= budget.depth {
            truncated = true;
            continue;
        }
        if t.cuts < MAX_CUTS {
            if let Some((coeffs, lower)) = t.gomory_cut() {
                t.add_cut(coeffs, lower);
                stack.push((t, depth + 1));
                continue;
            }
        }
        let v = t.val[x].clone();
        let fl = v.floor();
        let ce = v.ceil();
        let down_first = (&v - &fl) <= (&ce - &v);
        let mut down = t.clone();
        down.set_upper(x, fl);
        let mut up = t;
        up.set_lower(x, ce);
        // pushed in reverse so that the preferred child is explored first
        let order = if down_first { [up, down] } else { [down, up] };
        stack.extend(order.into_iter().filter(|c| c.bounds_consistent(x)).map(|c| (c, depth + 1)));
    }
    Ok(if truncated { IlpResult::Truncated } else { IlpResult::Unsat })
}
