//! Finite automata and transducers over symbol ranges.

mod compile;
mod nfa;
mod nft;

pub use compile::{compile_regex, concat};
pub use nfa::{pick_symbol, split_ranges, Nfa, State};
pub use nft::{lit_output, render, EpsFreeNft, Nft, NftError, NftTrans, OutItem, Output};

use crate::alphabet::Universe;

/// Intersection of two NFAs.
pub fn nfa_intersect(a: &Nfa, b: &Nfa) -> Nfa {
    a.intersect(b)
}

/// Complement over the given universe.
pub fn nfa_complement(a: &Nfa, u: Universe) -> Nfa {
    a.complement(u)
}

pub fn nfa_accepts(a: &Nfa, w: &[u32]) -> bool {
    a.accepts(w)
}

pub fn nfa_is_empty(a: &Nfa) -> bool {
    a.is_empty()
}

/// All outputs of `t` on `w`, failing when there are more than `max`.
pub fn nft_outputs(t: &Nft, w: &[u32], max: usize) -> Result<std::collections::BTreeSet<Vec<u32>>, NftError> {
    t.outputs(w, max)
}
