#![allow(dead_code)]

use ltlx_core::alphabet::{Alphabet, Symbol, Word};
use ltlx_core::ltl::Formula;
use rand::Rng;

/// Satisfaction straight from the recursive definition, positions 1..=|u|.
pub fn holds_at(phi: &Formula, u: &Word, t: usize) -> bool {
    let n = u.len();
    match phi {
        Formula::Atom(a) => u.at(t) == *a,
        Formula::True => true,
        Formula::False => false,
        Formula::Not(x) => !holds_at(x, u, t),
        Formula::And(x, y) => holds_at(x, u, t) && holds_at(y, u, t),
        Formula::Or(x, y) => holds_at(x, u, t) || holds_at(y, u, t),
        Formula::Implies(x, y) => !holds_at(x, u, t) || holds_at(y, u, t),
        Formula::Next(x) => t < n && holds_at(x, u, t + 1),
        Formula::Finally(x) => (t..=n).any(|s| holds_at(x, u, s)),
        Formula::Globally(x) => (t..=n).all(|s| holds_at(x, u, s)),
        Formula::Until(x, y) => (t..=n).any(|s| holds_at(y, u, s) && (t..s).all(|r| holds_at(x, u, r))),
    }
}

/// Value on the empty word: atoms and eventualities false, invariants true.
pub fn holds_empty(phi: &Formula) -> bool {
    match phi {
        Formula::Atom(_) | Formula::False | Formula::Next(_) | Formula::Finally(_) | Formula::Until(..) => false,
        Formula::True | Formula::Globally(_) => true,
        Formula::Not(x) => !holds_empty(x),
        Formula::And(x, y) => holds_empty(x) && holds_empty(y),
        Formula::Or(x, y) => holds_empty(x) || holds_empty(y),
        Formula::Implies(x, y) => !holds_empty(x) || holds_empty(y),
    }
}

pub fn oracle(phi: &Formula, u: &Word) -> bool {
    if u.is_empty() {
        holds_empty(phi)
    } else {
        holds_at(phi, u, 1)
    }
}

pub fn random_formula<R: Rng>(rng: &mut R, symbols: usize, depth: usize) -> Formula {
    let leaf = |rng: &mut R| match rng.gen_range(0..symbols + 2) {
        k if k < symbols => Formula::Atom(Symbol(k as u32)),
        k if k == symbols => Formula::True,
        _ => Formula::False,
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let sub = |rng: &mut R| random_formula(rng, symbols, depth - 1);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::next(sub(rng)),
        5 => Formula::finally(sub(rng)),
        6 => Formula::globally(sub(rng)),
        _ => Formula::until(sub(rng), sub(rng)),
    }
}

pub fn random_word<R: Rng>(rng: &mut R, symbols: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::new((0..len).map(|_| Symbol(rng.gen_range(0..symbols) as u32)).collect())
}

pub fn equivalent_up_to(a: &Formula, b: &Formula, alphabet: &Alphabet, n: usize) -> bool {
    alphabet.words_up_to(n).all(|w| oracle(a, &w) == oracle(b, &w))
}

/// Every formula of depth at most `depth` over the given atoms and all operators.
pub fn all_formulas(symbols: usize, depth: usize) -> Vec<Formula> {
    let mut level: Vec<Formula> = (0..symbols as u32).map(|k| Formula::Atom(Symbol(k))).collect();
    level.push(Formula::True);
    level.push(Formula::False);
    for _ in 0..depth {
        let prev = level.clone();
        let mut next = prev.clone();
        for x in &prev {
            next.push(Formula::not(x.clone()));
            next.push(Formula::next(x.clone()));
            next.push(Formula::finally(x.clone()));
            next.push(Formula::globally(x.clone()));
            for y in &prev {
                next.push(Formula::and(x.clone(), y.clone()));
                next.push(Formula::or(x.clone(), y.clone()));
                next.push(Formula::implies(x.clone(), y.clone()));
                next.push(Formula::until(x.clone(), y.clone()));
            }
        }
        next.sort();
        next.dedup();
        level = next;
    }
    level
}
