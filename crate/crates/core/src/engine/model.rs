//! Turning an arithmetic model into a verified assignment.

use super::{EngineError, Solution};
use crate::alphabet::{decode_seq, Word, SEP};
use crate::encode::{XOp, XStrScript};
use crate::frontend::{SeqStrScript, Sort};
use crate::interp::{check_model, elem_str, subseq_str, write_str, Assignment, Value};
use crate::lia::{LinExpr, Model};
use std::collections::BTreeMap;
use std::fmt::Write as _;

fn inconsistent(msg: impl Into<String>) -> EngineError {
    EngineError::InternalInconsistency(msg.into())
}

fn eval_index(e: &LinExpr, m: &Model) -> Result<i64, EngineError> {
    e.eval(m).map_err(|err| inconsistent(format!("index {e}: {err}")))
}

fn eval_op(op: &XOp, vals: &BTreeMap<String, Word>, m: &Model) -> Result<Word, EngineError> {
    let get = |v: &str| vals.get(v).ok_or_else(|| inconsistent(format!("no value for {v}")));
    let undefined = || inconsistent(format!("{op} is undefined on the witness"));
    Ok(match op {
        XOp::Copy(y) => get(y)?.clone(),
        XOp::Concat(a, b) => {
            let mut w = get(a)?.clone();
            w.extend_from_slice(get(b)?);
            w
        }
        XOp::SeqConcat(a, b) => {
            let mut w = get(a)?.clone();
            if w.pop() != Some(SEP) {
                return Err(undefined());
            }
            w.extend_from_slice(get(b)?);
            w
        }
        XOp::Transduce(t, a) => t.apply(get(a)?).ok_or_else(undefined)?,
        XOp::Write(a, k, b) => write_str(get(a)?, eval_index(k, m)?, get(b)?).ok_or_else(undefined)?,
        XOp::Subseq(a, k, j) => subseq_str(get(a)?, eval_index(k, m)?, eval_index(j, m)?).ok_or_else(undefined)?,
        XOp::Elem(a, k) => elem_str(get(a)?, eval_index(k, m)?).ok_or_else(undefined)?,
    })
}

/// Witnesses for the source variables, forward evaluation of the
/// definitions, decoding, and a final check against the original script.
pub(super) fn extract(s: &SeqStrScript, x: &XStrScript, order: &[usize], sol: Solution) -> Result<Assignment, EngineError> {
    let mut m = sol.model;
    for v in &x.int_vars {
        m.entry(v.clone()).or_insert(0);
    }
    let mut vals: BTreeMap<String, Word> = BTreeMap::new();
    for (v, c) in &sol.state.cons {
        let w = match sol.images.get(v) {
            Some(img) => img.witness(&m),
            None => c.to_nfa().shortest_word(),
        };
        vals.insert(v.clone(), w.ok_or_else(|| inconsistent(format!("no witness for {v}")))?);
    }
    for &i in order.iter().rev() {
        let d = &x.defs[i];
        let w = eval_op(&d.op, &vals, &m)?;
        vals.insert(d.lhs.clone(), w);
    }
    let mut out = Assignment::new();
    for (v, sort) in &s.decls {
        let value = match sort {
            Sort::Int => Value::Int(m.get(v).copied().unwrap_or(0)),
            Sort::Str => Value::Str(vals.get(v).cloned().unwrap_or_default()),
            Sort::Seq => match vals.get(v) {
                Some(w) => Value::Seq(decode_seq(w).ok_or_else(|| inconsistent(format!("{v} is not an encoding")))?),
                None => Value::Seq(Vec::new()),
            },
        };
        out.insert(v.clone(), value);
    }
    if !check_model(s, &out) {
        let mut msg = String::from("model fails verification:");
        for (v, val) in &out {
            let _ = write!(msg, " {v}={val}");
        }
        return Err(inconsistent(msg));
    }
    Ok(out)
}

/// The model in `get-model` shape.
pub fn format_model(s: &SeqStrScript, m: &Assignment) -> String {
    let mut out = String::from("(\n");
    for (v, sort) in &s.decls {
        if let Some(val) = m.get(v) {
            let _ = writeln!(out, "  (define-fun {v} () {sort} {val})");
        }
    }
    out.push(')');
    out
}
