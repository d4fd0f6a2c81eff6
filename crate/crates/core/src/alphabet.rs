//! Symbols, words, and the reserved sequence separator.

use std::fmt::Write as _;

/// A symbol: a Unicode scalar value, or [`SEP`].
pub type Sym = u32;

/// A word over the extended alphabet.
pub type Word = Vec<Sym>;

/// Largest user symbol.
pub const MAX_CHAR: Sym = 0x10FFFF;

/// The separator used to encode sequences. It lies outside the Unicode range,
/// so it can never occur in a user string.
pub const SEP: Sym = 0x110000;

/// Which symbols an automaton operation ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Universe {
    /// User characters only.
    Sigma,
    /// User characters plus the separator.
    SigmaSep,
}

impl Universe {
    pub fn max(self) -> Sym {
        match self {
            Universe::Sigma => MAX_CHAR,
            Universe::SigmaSep => SEP,
        }
    }
}

/// Converts a Rust string to a word.
pub fn word(s: &str) -> Word {
    s.chars().map(|c| c as Sym).collect()
}

/// Converts a string in which `†` stands for the separator.
pub fn sep_word(s: &str) -> Word {
    s.chars()
        .map(|c| if c == '†' { SEP } else { c as Sym })
        .collect()
}

/// Renders a word, printing the separator as `†` and unprintable symbols as
/// `\u{..}` escapes.
pub fn show_word(w: &[Sym]) -> String {
    let mut out = String::new();
    for &c in w {
        out.push_str(&show_sym(c));
    }
    out
}

pub fn show_sym(c: Sym) -> String {
    if c == SEP {
        return "†".to_string();
    }
    match char::from_u32(c) {
        Some(ch) if !ch.is_control() && ch != '\\' => ch.to_string(),
        Some('\\') => "\\\\".to_string(),
        _ => {
            let mut s = String::new();
            let _ = write!(s, "\\u{{{:x}}}", c);
            s
        }
    }
}

/// Converts a separator-free word back to a `String`, if every symbol is a
/// Unicode scalar value.
pub fn to_string(w: &[Sym]) -> Option<String> {
    w.iter().map(|&c| char::from_u32(c)).collect()
}

/// Renders a word as an SMT-LIB string literal body (quotes not included).
pub fn smt_escape(w: &[Sym]) -> String {
    let mut out = String::new();
    for &c in w {
        match c {
            0x22 => out.push_str("\"\""),
            0x20..=0x7E if c != 0x5C => out.push(char::from_u32(c).unwrap()),
            _ => {
                let _ = write!(out, "\\u{{{:x}}}", c);
            }
        }
    }
    out
}

/// Splits an encoded sequence into its elements. Returns `None` unless the
/// word starts and ends with the separator.
pub fn decode_seq(w: &[Sym]) -> Option<Vec<Word>> {
    if w.first() != Some(&SEP) || w.last() != Some(&SEP) {
        return None;
    }
    if w.len() == 1 {
        return Some(Vec::new());
    }
    Some(
        w[1..w.len() - 1]
            .split(|&c| c == SEP)
            .map(|p| p.to_vec())
            .collect(),
    )
}

/// Encodes a sequence of separator-free words.
pub fn encode_seq(s: &[Word]) -> Word {
    let mut out = vec![SEP];
    for e in s {
        out.extend_from_slice(e);
        out.push(SEP);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode() {
        let s = vec![word("ab"), word(""), word("c")];
        let e = encode_seq(&s);
        assert_eq!(show_word(&e), "†ab††c†");
        assert_eq!(decode_seq(&e), Some(s));
        assert_eq!(decode_seq(&[SEP]), Some(vec![]));
        assert_eq!(decode_seq(&word("ab")), None);
    }

    #[test]
    fn escapes() {
        assert_eq!(smt_escape(&word("a\"b")), "a\"\"b");
        assert_eq!(show_sym(SEP), "†");
        assert_eq!(show_sym(7), "\\u{7}");
    }
}
