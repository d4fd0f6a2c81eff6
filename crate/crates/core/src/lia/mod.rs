//! Quantifier-free linear integer arithmetic.

mod simplex;
mod solver;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;
use thiserror::Error;

pub use solver::Limits;

pub type Var = String;
pub type Model = BTreeMap<Var, i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiaError {
    #[error("non-linear term: {0}")]
    NonLinear(String),
    #[error("unbound variable {0}")]
    UnboundVariable(Var),
    #[error("integer overflow in arithmetic")]
    Overflow,
    #[error("resource limit reached in arithmetic solver")]
    ResourceLimit,
}

/// A linear term `sum(c_i * x_i) + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Var, i64>,
    pub constant: i64,
}

fn ck(v: Option<i64>) -> i64 {
    v.expect("integer overflow in linear term")
}

impl LinExpr {
    pub fn constant(c: i64) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: impl Into<Var>) -> LinExpr {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v.into(), 1);
        LinExpr {
            coeffs,
            constant: 0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, v: &str, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry(v.to_string()).or_insert(0);
        *e = ck(e.checked_add(c));
        if *e == 0 {
            self.coeffs.remove(v);
        }
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_term(v, *c);
        }
        out.constant = ck(out.constant.checked_add(other.constant));
        out
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> LinExpr {
        if k == 0 {
            return LinExpr::constant(0);
        }
        LinExpr {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), ck(c.checked_mul(k))))
                .collect(),
            constant: ck(self.constant.checked_mul(k)),
        }
    }

    pub fn plus_const(&self, k: i64) -> LinExpr {
        let mut out = self.clone();
        out.constant = ck(out.constant.checked_add(k));
        out
    }

    /// Product of two terms; fails unless one side is constant.
    pub fn mul(&self, other: &LinExpr) -> Result<LinExpr, LiaError> {
        if self.is_constant() {
            Ok(other.scale(self.constant))
        } else if other.is_constant() {
            Ok(self.scale(other.constant))
        } else {
            Err(LiaError::NonLinear(format!("({self}) * ({other})")))
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn eval(&self, m: &Model) -> Result<i64, LiaError> {
        let mut acc: i64 = self.constant;
        for (v, c) in &self.coeffs {
            let x = *m.get(v).ok_or_else(|| LiaError::UnboundVariable(v.clone()))?;
            acc = c
                .checked_mul(x)
                .and_then(|p| acc.checked_add(p))
                .ok_or(LiaError::Overflow)?;
        }
        Ok(acc)
    }

    /// Replaces `v` by `t`.
    pub fn substitute(&self, v: &str, t: &LinExpr) -> LinExpr {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(&c) => {
                let mut rest = self.clone();
                rest.coeffs.remove(v);
                rest.add(&t.scale(c))
            }
        }
    }

    pub fn rename(&self, f: &dyn Fn(&str) -> Var) -> LinExpr {
        let mut out = LinExpr::constant(self.constant);
        for (v, c) in &self.coeffs {
            out.add_term(&f(v), *c);
        }
        out
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let (sign, mag) = if *c < 0 { ("-", -(*c as i128)) } else { ("+", *c as i128) };
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)
        } else if self.constant < 0 {
            write!(f, " - {}", -(self.constant as i128))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }

    pub fn negate(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Gt => Rel::Le,
            Rel::Ge => Rel::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LiaFormula {
    True,
    False,
    Cmp(LinExpr, Rel, LinExpr),
    And(Vec<LiaFormula>),
    Or(Vec<LiaFormula>),
    Not(Box<LiaFormula>),
}

impl LiaFormula {
    pub fn cmp(a: LinExpr, r: Rel, b: LinExpr) -> LiaFormula {
        LiaFormula::Cmp(a, r, b)
    }

    pub fn eq(a: LinExpr, b: LinExpr) -> LiaFormula {
        LiaFormula::Cmp(a, Rel::Eq, b)
    }

    pub fn le(a: LinExpr, b: LinExpr) -> LiaFormula {
        LiaFormula::Cmp(a, Rel::Le, b)
    }

    pub fn and(fs: Vec<LiaFormula>) -> LiaFormula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                LiaFormula::True => {}
                LiaFormula::False => return LiaFormula::False,
                LiaFormula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => LiaFormula::True,
            1 => out.pop().unwrap(),
            _ => LiaFormula::And(out),
        }
    }

    pub fn or(fs: Vec<LiaFormula>) -> LiaFormula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                LiaFormula::False => {}
                LiaFormula::True => return LiaFormula::True,
                LiaFormula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => LiaFormula::False,
            1 => out.pop().unwrap(),
            _ => LiaFormula::Or(out),
        }
    }

    pub fn not(f: LiaFormula) -> LiaFormula {
        LiaFormula::Not(Box::new(f))
    }

    pub fn eval(&self, m: &Model) -> Result<bool, LiaError> {
        Ok(match self {
            LiaFormula::True => true,
            LiaFormula::False => false,
            LiaFormula::Cmp(a, r, b) => r.holds(a.eval(m)?, b.eval(m)?),
            LiaFormula::And(fs) => {
                for f in fs {
                    if !f.eval(m)? {
                        return Ok(false);
                    }
                }
                true
            }
            LiaFormula::Or(fs) => {
                for f in fs {
                    if f.eval(m)? {
                        return Ok(true);
                    }
                }
                false
            }
            LiaFormula::Not(f) => !f.eval(m)?,
        })
    }

    pub fn free_vars(&self, out: &mut std::collections::BTreeSet<Var>) {
        match self {
            LiaFormula::True | LiaFormula::False => {}
            LiaFormula::Cmp(a, _, b) => {
                out.extend(a.vars().cloned());
                out.extend(b.vars().cloned());
            }
            LiaFormula::And(fs) | LiaFormula::Or(fs) => fs.iter().for_each(|f| f.free_vars(out)),
            LiaFormula::Not(f) => f.free_vars(out),
        }
    }

    /// Replaces variable `v` by the term `t` everywhere.
    pub fn substitute(&self, v: &str, t: &LinExpr) -> LiaFormula {
        self.map_terms(&|e| e.substitute(v, t))
    }

    pub fn rename(&self, f: &dyn Fn(&str) -> Var) -> LiaFormula {
        self.map_terms(&|e| e.rename(f))
    }

    fn map_terms(&self, g: &dyn Fn(&LinExpr) -> LinExpr) -> LiaFormula {
        match self {
            LiaFormula::True => LiaFormula::True,
            LiaFormula::False => LiaFormula::False,
            LiaFormula::Cmp(a, r, b) => LiaFormula::Cmp(g(a), *r, g(b)),
            LiaFormula::And(fs) => LiaFormula::And(fs.iter().map(|f| f.map_terms(g)).collect()),
            LiaFormula::Or(fs) => LiaFormula::Or(fs.iter().map(|f| f.map_terms(g)).collect()),
            LiaFormula::Not(f) => LiaFormula::Not(Box::new(f.map_terms(g))),
        }
    }
}

impl fmt::Display for LiaFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiaFormula::True => write!(f, "true"),
            LiaFormula::False => write!(f, "false"),
            LiaFormula::Cmp(a, r, b) => write!(f, "{a} {} {b}", r.symbol()),
            LiaFormula::And(fs) | LiaFormula::Or(fs) => {
                let sep = if matches!(self, LiaFormula::And(_)) { " and " } else { " or " };
                write!(f, "(")?;
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            LiaFormula::Not(x) => write!(f, "not {x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiaResult {
    Sat(Model),
    Unsat,
}

impl LiaResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, LiaResult::Sat(_))
    }
}

/// Decides `f` with default limits. The returned model assigns every free
/// variable of `f`.
pub fn lia_check_sat(f: &LiaFormula) -> Result<LiaResult, LiaError> {
    check_sat_with(f, &Limits::default())
}

pub fn check_sat_with(f: &LiaFormula, limits: &Limits) -> Result<LiaResult, LiaError> {
    solver::solve(f, limits)
}

pub fn lia_eval(f: &LiaFormula, m: &Model) -> Result<bool, LiaError> {
    f.eval(m)
}

/// A deadline helper shared by the solver layers.
pub(crate) fn expired(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> LinExpr {
        LinExpr::var("x")
    }
    fn y() -> LinExpr {
        LinExpr::var("y")
    }
    fn k(c: i64) -> LinExpr {
        LinExpr::constant(c)
    }

    #[test]
    fn spec_examples() {
        let f = LiaFormula::and(vec![
            LiaFormula::eq(x().add(&y()), k(3)),
            LiaFormula::cmp(x(), Rel::Ge, k(2)),
            LiaFormula::cmp(y(), Rel::Ge, k(0)),
        ]);
        match lia_check_sat(&f).unwrap() {
            LiaResult::Sat(m) => assert!(f.eval(&m).unwrap()),
            LiaResult::Unsat => panic!("expected sat"),
        }
        let g = LiaFormula::and(vec![
            LiaFormula::cmp(x(), Rel::Lt, k(0)),
            LiaFormula::cmp(x(), Rel::Gt, k(0)),
        ]);
        assert_eq!(lia_check_sat(&g).unwrap(), LiaResult::Unsat);
        let h = LiaFormula::eq(x().scale(2), k(3));
        assert_eq!(lia_check_sat(&h).unwrap(), LiaResult::Unsat);
    }

    #[test]
    fn eval_rules() {
        let m: Model = [("x".to_string(), 2)].into_iter().collect();
        assert!(LiaFormula::le(x(), k(2)).eval(&m).unwrap());
        assert!(!LiaFormula::cmp(x(), Rel::Ne, x()).eval(&m).unwrap());
        assert_eq!(
            LiaFormula::le(y(), k(0)).eval(&m),
            Err(LiaError::UnboundVariable("y".into()))
        );
        // substitution law
        let f = LiaFormula::le(x().scale(3).add(&y()), k(7));
        let t = y().plus_const(1);
        let m2: Model = [("y".to_string(), 1)].into_iter().collect();
        let mut m3 = m2.clone();
        m3.insert("x".into(), t.eval(&m2).unwrap());
        assert_eq!(f.substitute("x", &t).eval(&m2), f.eval(&m3));
    }

    #[test]
    fn nonlinear_rejected() {
        assert!(matches!(x().mul(&y()), Err(LiaError::NonLinear(_))));
        assert_eq!(x().mul(&k(3)).unwrap(), x().scale(3));
    }
}
