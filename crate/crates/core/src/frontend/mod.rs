//! Input language: SMT-LIB style scripts over integers, strings and string
//! sequences.

mod ast;
mod normalize;
mod parser;

pub use ast::{Atom, IntTerm, SeqStrScript, SeqTerm, Sort, StrTerm};
pub use normalize::{check_straight_line, defined_var, dependency_graph, normalize, DependencyGraph, SlViolation};
pub use parser::parse_script;

use crate::regex::RegexError;
use crate::sexpr::{Pos, SexpError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("parse error at {0}")]
    Parse(#[from] SexpError),
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: sort error in '{op}': {msg}")]
    Sort { pos: Pos, op: String, msg: String },
    #[error("{pos}: undeclared identifier '{name}'")]
    Undeclared { pos: Pos, name: String },
    #[error("{pos}: string/sequence disequality is not supported; it needs a disjunction over fresh variables, which is outside the disjunction-free fragment")]
    Disequality { pos: Pos },
    #[error(transparent)]
    Regex(#[from] RegexError),
}
