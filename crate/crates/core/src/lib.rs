//! A decision procedure for straight-line constraints over strings and
//! string sequences.
//!
//! Sequences are encoded as separator-delimited strings, constraints on
//! defined variables are propagated backwards as cost-enriched automata
//! through pre-images of every operation, and the remaining arithmetic is
//! discharged by a linear integer arithmetic solver.

pub mod alphabet;
pub mod bench;
pub mod automata;
pub mod cefa;
pub mod encode;
pub mod engine;
pub mod frontend;
pub mod interp;
pub mod lia;
pub mod preimage;
pub mod regex;
pub mod sexpr;
pub mod transducers;
