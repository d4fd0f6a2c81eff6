//! The decision procedure for straight-line scripts.
//!
//! Definitions are processed from the outputs towards the sources. Each step
//! replaces the automaton constraint of a defined variable by constraints on
//! its arguments, choosing one pre-image alternative; choices are explored
//! depth-first. When every definition has been processed, the remaining
//! automata and the collected arithmetic are checked together.

mod model;

pub use model::format_model;

use crate::alphabet::Universe;
use crate::automata::{EpsFreeNft, Nfa};
use crate::cefa::{cefa_register_image, Cefa, CefaError, RegisterImage};
use crate::encode::{enc_formula, format_automata, EncodeError, XKind, XOp, XStrScript};
use crate::frontend::{check_straight_line, normalize, parse_script, FrontendError, SeqStrScript};
use crate::interp::Assignment;
use crate::lia::{check_sat_with, LiaError, LiaFormula, LiaResult, Limits, Model};
use crate::preimage::{
    pre_concat, pre_elem, pre_nft, pre_seqconcat, pre_subseq, pre_write, seqlen_cefa, strlen_cefa,
    PreimageAlternative,
};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub timeout: Option<Duration>,
    /// Largest product automaton built before giving up.
    pub max_product_states: usize,
    /// Check the arithmetic of partial states before descending.
    pub prune_with_lia: bool,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            timeout: None,
            max_product_states: 200_000,
            prune_with_lia: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Assignment),
    Unsat,
    Unknown(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

impl From<EncodeError> for EngineError {
    fn from(e: EncodeError) -> EngineError {
        EngineError::InternalInconsistency(e.to_string())
    }
}

/// Why a search stopped without a verdict.
enum Abort {
    Timeout,
    TooLarge(usize),
    Internal(String),
}

impl From<CefaError> for Abort {
    fn from(e: CefaError) -> Abort {
        match e {
            CefaError::TooLarge(n) => Abort::TooLarge(n),
            other => Abort::Internal(other.to_string()),
        }
    }
}

/// Constraints of a partial solution: at most one automaton per variable
/// (several are combined by product) and a conjunction of arithmetic.
#[derive(Clone, Debug, Default)]
struct SolveState {
    cons: BTreeMap<String, Cefa>,
    pool: Vec<LiaFormula>,
}

struct Search<'a> {
    x: &'a XStrScript,
    /// Definition indices, each before the definitions of its arguments.
    order: Vec<usize>,
    nfts: HashMap<usize, EpsFreeNft>,
    opts: &'a SolveOptions,
    deadline: Option<Instant>,
    /// Set when some branch was abandoned for lack of resources.
    incomplete: Option<String>,
}

/// Final arithmetic model plus the automata of the source variables.
struct Solution {
    state: SolveState,
    images: BTreeMap<String, RegisterImage>,
    model: Model,
}

fn universal() -> Cefa {
    Cefa::from_nfa(&Nfa::universal(Universe::SigmaSep))
}

/// Orders definitions so that each comes before the definitions of its
/// arguments.
fn propagation_order(x: &XStrScript) -> Vec<usize> {
    let def_of: HashMap<&str, usize> = x.defs.iter().enumerate().map(|(i, d)| (d.lhs.as_str(), i)).collect();
    let mut uses = vec![0usize; x.defs.len()];
    for d in &x.defs {
        for a in d.op.args() {
            if let Some(&j) = def_of.get(a) {
                uses[j] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..x.defs.len()).filter(|&i| uses[i] == 0).rev().collect();
    let mut order = Vec::new();
    while let Some(i) = ready.pop() {
        order.push(i);
        for a in x.defs[i].op.args() {
            if let Some(&j) = def_of.get(a) {
                uses[j] -= 1;
                if uses[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    debug_assert_eq!(order.len(), x.defs.len(), "definitions must be acyclic");
    order
}

impl Search<'_> {
    fn check_time(&self) -> Result<(), Abort> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Abort::Timeout),
            _ => Ok(()),
        }
    }

    fn add(&self, st: &mut SolveState, var: &str, c: Cefa) -> Result<bool, Abort> {
        let combined = match st.cons.get(var) {
            None => c.trim(),
            Some(old) => old.product_capped(&c, self.opts.max_product_states)?,
        };
        if combined.is_empty() {
            return Ok(false);
        }
        st.cons.insert(var.to_string(), combined.reduce());
        Ok(true)
    }

    fn alternatives(&self, def: usize, a: &Cefa) -> Result<Vec<PreimageAlternative>, Abort> {
        let d = &self.x.defs[def];
        let mut alts = match &d.op {
            XOp::Copy(_) => vec![PreimageAlternative {
                args: vec![a.clone()],
                constraint: LiaFormula::True,
            }],
            XOp::Concat(..) => pre_concat(a),
            XOp::SeqConcat(..) => pre_seqconcat(a),
            XOp::Transduce(..) => pre_nft(&self.nfts[&def], a)?,
            XOp::Write(_, k, _) => pre_write(a, k),
            XOp::Subseq(_, k, j) => pre_subseq(a, k, j),
            XOp::Elem(_, k) => pre_elem(a, k),
        };
        alts.retain(|alt| !alt.is_empty());
        alts.sort_by_key(PreimageAlternative::size);
        Ok(alts)
    }

    fn limits(&self) -> Limits {
        Limits {
            deadline: self.deadline,
            ..Limits::default()
        }
    }

    /// Conjunction of the pool, the script's arithmetic and the register
    /// images of all automata. Images are returned for witness extraction.
    fn arithmetic(&self, st: &SolveState) -> (LiaFormula, BTreeMap<String, RegisterImage>) {
        let mut parts = st.pool.clone();
        parts.extend(self.x.lia.iter().cloned());
        let mut images = BTreeMap::new();
        for (v, c) in &st.cons {
            if c.k() == 0 {
                continue;
            }
            let img = cefa_register_image(c);
            parts.push(img.formula.clone());
            images.insert(v.clone(), img);
        }
        (LiaFormula::and(parts), images)
    }

    fn lia(&mut self, f: &LiaFormula) -> Result<Option<Model>, Abort> {
        match check_sat_with(f, &self.limits()) {
            Ok(LiaResult::Sat(m)) => Ok(Some(m)),
            Ok(LiaResult::Unsat) => Ok(None),
            Err(LiaError::ResourceLimit) => {
                self.check_time()?;
                self.incomplete = Some("arithmetic solver node limit reached".into());
                Ok(None)
            }
            Err(e) => Err(Abort::Internal(e.to_string())),
        }
    }

    fn dfs(&mut self, step: usize, mut st: SolveState) -> Result<Option<Solution>, Abort> {
        self.check_time()?;
        if step == self.order.len() {
            let (f, images) = self.arithmetic(&st);
            return Ok(self.lia(&f)?.map(|model| Solution { state: st, images, model }));
        }
        let def = self.order[step];
        let d = &self.x.defs[def];
        let a = st.cons.remove(&d.lhs).unwrap_or_else(universal);
        let alts = self.alternatives(def, &a)?;
        let branching = alts.len() > 1;
        for alt in alts {
            self.check_time()?;
            let mut next = st.clone();
            let mut alive = true;
            for (arg, c) in d.op.args().into_iter().zip(alt.args) {
                if !self.add(&mut next, arg, c)? {
                    alive = false;
                    break;
                }
            }
            if !alive {
                continue;
            }
            next.pool.push(alt.constraint);
            if branching && self.opts.prune_with_lia && step + 1 < self.order.len() {
                let (f, _) = self.arithmetic(&next);
                if self.lia(&f)?.is_none() {
                    continue;
                }
            }
            if let Some(sol) = self.dfs(step + 1, next)? {
                return Ok(Some(sol));
            }
        }
        Ok(None)
    }
}

/// Automaton constraints that hold before any propagation: formats,
/// memberships and length counters.
fn initial_state(x: &XStrScript, search: &Search) -> Result<Option<SolveState>, Abort> {
    let (a0, a1) = format_automata();
    let mut st = SolveState::default();
    let add = |st: &mut SolveState, v: &str, c: Cefa| search.add(st, v, c);
    for (v, kind) in &x.vars {
        let fmt = match kind {
            XKind::Plain => &a1,
            XKind::Encoded => &a0,
            XKind::Raw => continue,
        };
        if !add(&mut st, v, Cefa::from_nfa(fmt))? {
            return Ok(None);
        }
    }
    for (v, m) in &x.memberships {
        if !add(&mut st, v, Cefa::from_nfa(&m.nfa()))? {
            return Ok(None);
        }
    }
    for (v, reg) in x.counters() {
        let c = if reg.starts_with("#len:") {
            strlen_cefa(reg)
        } else {
            seqlen_cefa(reg)
        };
        if !add(&mut st, &v, c)? {
            return Ok(None);
        }
    }
    Ok(Some(st))
}

/// Decides a parsed script.
pub fn solve(s: &SeqStrScript, opts: &SolveOptions) -> Result<Verdict, EngineError> {
    let start = Instant::now();
    let n = normalize(s);
    if let Err(v) = check_straight_line(&n) {
        return Ok(Verdict::Unknown(format!("not straight-line: {v}")));
    }
    let x = enc_formula(&n)?;
    let nfts = x
        .defs
        .iter()
        .enumerate()
        .filter_map(|(i, d)| match &d.op {
            XOp::Transduce(t, _) => Some((i, t.nft().remove_epsilon())),
            _ => None,
        })
        .collect();
    let mut search = Search {
        x: &x,
        order: propagation_order(&x),
        nfts,
        opts,
        deadline: opts.timeout.map(|t| start + t),
        incomplete: None,
    };
    let outcome = match initial_state(&x, &search) {
        Ok(None) => Ok(None),
        Ok(Some(st)) => search.dfs(0, st),
        Err(e) => Err(e),
    };
    match outcome {
        Ok(Some(sol)) => {
            let m = model::extract(s, &x, &search.order, sol)?;
            Ok(Verdict::Sat(m))
        }
        Ok(None) => Ok(match search.incomplete {
            Some(why) => Verdict::Unknown(why),
            None => Verdict::Unsat,
        }),
        Err(Abort::Timeout) => Ok(Verdict::Unknown("timeout".into())),
        Err(Abort::TooLarge(n)) => Ok(Verdict::Unknown(format!("product automaton exceeds {n} states"))),
        Err(Abort::Internal(msg)) => Err(EngineError::InternalInconsistency(msg)),
    }
}

/// Parses and decides an SMT-LIB script.
pub fn solve_source(src: &str, opts: &SolveOptions) -> Result<Verdict, EngineError> {
    let s = parse_script(src)?;
    solve(&s, opts)
}
