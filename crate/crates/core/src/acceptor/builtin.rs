//! Ground-truth acceptors for the bundled benchmark languages.

use super::dfa::Dfa;
use crate::alphabet::{Alphabet, Symbol};

pub const NAMES: &[&str] = &["balanced-parens", "email", "alternating-bit"];

pub fn parens_alphabet() -> Alphabet {
    Alphabet::new(["l", "r", "a"]).expect("valid alphabet")
}

/// Counter deltas for `l`, `r`, `a`.
pub fn parens_deltas() -> Vec<i64> {
    vec![1, -1, 0]
}

pub fn email_alphabet() -> Alphabet {
    Alphabet::new(["p", "m", "@", "∘"]).expect("valid alphabet")
}

/// `[a-z][a-z0-9]*@[a-z0-9]+.[a-z]+$` with `p` for a letter, `m` for a digit,
/// `∘` for the dot.
pub fn email() -> Dfa {
    let ab = email_alphabet();
    let s = |n: &str| ab.symbol(n).unwrap();
    let (p, m, at, dot) = (s("p"), s("m"), s("@"), s("∘"));
    let transitions = [
        (0, p, 1),
        (1, p, 1),
        (1, m, 1),
        (1, at, 2),
        (2, p, 3),
        (2, m, 3),
        (3, p, 3),
        (3, m, 3),
        (3, dot, 4),
        (4, p, 5),
        (5, p, 5),
    ];
    Dfa::new(ab.clone(), 6, 0, [5], transitions).expect("well formed")
}

pub fn alternating_bit_alphabet() -> Alphabet {
    Alphabet::new(["msg0", "ack0", "msg1", "ack1"]).expect("valid alphabet")
}

/// Four-state protocol automaton; only the initial state accepts.
pub fn alternating_bit() -> Dfa {
    let ab = alternating_bit_alphabet();
    let (msg0, ack0, msg1, ack1) = (Symbol(0), Symbol(1), Symbol(2), Symbol(3));
    let transitions = [
        (0, ack1, 0),
        (0, msg0, 1),
        (1, msg0, 1),
        (1, ack0, 2),
        (2, ack0, 2),
        (2, msg1, 3),
        (3, msg1, 3),
        (3, ack1, 0),
    ];
    Dfa::new(ab, 4, 0, [0], transitions).expect("well formed")
}
