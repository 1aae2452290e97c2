//! Linear temporal logic over finite words.
//!
//! Formulas are plain trees; [`Formula::size`] counts structurally distinct
//! subformulas, i.e. the node count of the syntax DAG obtained by sharing
//! equal subtrees. Evaluation is by dynamic programming over positions, see
//! [`evaluate`].

mod eval;
mod parse;

use std::collections::HashMap;
use std::fmt;

use crate::alphabet::{Alphabet, Symbol};

pub use eval::{evaluate, satisfies, satisfies_empty, CompiledFormula, EvalTable};
pub use parse::{parse_ltl, ParseError};

/// An LTL formula. Atoms test the symbol at the current position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Symbol),
    True,
    False,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Finally(Box<Formula>),
    Globally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

/// Top-level connective of a formula, without its operands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Atom(Symbol),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Finally,
    Globally,
    Until,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Atom(_) | Op::True | Op::False => 0,
            Op::Not | Op::Next | Op::Finally | Op::Globally => 1,
            Op::And | Op::Or | Op::Implies | Op::Until => 2,
        }
    }

    /// Truth value on the empty word, given the operands' values on it.
    ///
    /// Atoms, `false`, `X`, `F` and `U` need a position and are false;
    /// `true` and `G` hold vacuously.
    pub fn empty_value(self, left: bool, right: bool) -> bool {
        match self {
            Op::Atom(_) | Op::False | Op::Next | Op::Finally | Op::Until => false,
            Op::True | Op::Globally => true,
            Op::Not => !left,
            Op::And => left && right,
            Op::Or => left || right,
            Op::Implies => !left || right,
        }
    }
}

impl Formula {
    pub fn atom(sym: Symbol) -> Self {
        Formula::Atom(sym)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn finally(f: Formula) -> Self {
        Formula::Finally(Box::new(f))
    }

    pub fn globally(f: Formula) -> Self {
        Formula::Globally(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    /// Builds a node from an operator and its operands. Panics on arity mismatch.
    pub fn from_op(op: Op, left: Option<Formula>, right: Option<Formula>) -> Self {
        let l = || Box::new(left.clone().expect("missing left operand"));
        let r = || Box::new(right.clone().expect("missing right operand"));
        match op {
            Op::Atom(s) => Formula::Atom(s),
            Op::True => Formula::True,
            Op::False => Formula::False,
            Op::Not => Formula::Not(l()),
            Op::Next => Formula::Next(l()),
            Op::Finally => Formula::Finally(l()),
            Op::Globally => Formula::Globally(l()),
            Op::And => Formula::And(l(), r()),
            Op::Or => Formula::Or(l(), r()),
            Op::Implies => Formula::Implies(l(), r()),
            Op::Until => Formula::Until(l(), r()),
        }
    }

    pub fn op(&self) -> Op {
        match self {
            Formula::Atom(s) => Op::Atom(*s),
            Formula::True => Op::True,
            Formula::False => Op::False,
            Formula::Not(_) => Op::Not,
            Formula::And(..) => Op::And,
            Formula::Or(..) => Op::Or,
            Formula::Implies(..) => Op::Implies,
            Formula::Next(_) => Op::Next,
            Formula::Finally(_) => Op::Finally,
            Formula::Globally(_) => Op::Globally,
            Formula::Until(..) => Op::Until,
        }
    }

    /// Operands in left-to-right order.
    pub fn children(&self) -> (Option<&Formula>, Option<&Formula>) {
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => (None, None),
            Formula::Not(a) | Formula::Next(a) | Formula::Finally(a) | Formula::Globally(a) => {
                (Some(a), None)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
                (Some(a), Some(b))
            }
        }
    }

    /// Distinct subformulas in bottom-up order; the last entry is `self`.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut seen: HashMap<&Formula, ()> = HashMap::new();
        let mut order: Vec<&Formula> = Vec::new();
        fn visit<'a>(f: &'a Formula, seen: &mut HashMap<&'a Formula, ()>, order: &mut Vec<&'a Formula>) {
            if seen.contains_key(f) {
                return;
            }
            let (l, r) = f.children();
            if let Some(l) = l {
                visit(l, seen, order);
            }
            if let Some(r) = r {
                visit(r, seen, order);
            }
            seen.insert(f, ());
            order.push(f);
        }
        visit(self, &mut seen, &mut order);
        order.into_iter().cloned().collect()
    }

    /// Number of structurally distinct subformulas.
    pub fn size(&self) -> usize {
        CompiledFormula::new(self).len()
    }

    /// Nesting depth; atoms and constants have depth 1.
    pub fn depth(&self) -> usize {
        match self.children() {
            (None, _) => 1,
            (Some(l), None) => 1 + l.depth(),
            (Some(l), Some(r)) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn atoms_within(&self, alphabet: &Alphabet) -> bool {
        match self {
            Formula::Atom(s) => alphabet.contains(*s),
            _ => {
                let (l, r) = self.children();
                l.is_none_or(|f| f.atoms_within(alphabet)) && r.is_none_or(|f| f.atoms_within(alphabet))
            }
        }
    }

    /// Renders the formula in canonical, fully parenthesized concrete syntax.
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> Display<'a> {
        Display { formula: self, alphabet }
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.display(alphabet).to_string()
    }
}

/// Canonical printer returned by [`Formula::display`].
pub struct Display<'a> {
    formula: &'a Formula,
    alphabet: &'a Alphabet,
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self.formula, self.alphabet, f)
    }
}

fn write_formula(phi: &Formula, ab: &Alphabet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let unary = |name: &str, a: &Formula, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        write!(f, "{name}(")?;
        write_formula(a, ab, f)?;
        f.write_str(")")
    };
    let binary = |name: &str, a: &Formula, b: &Formula, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        f.write_str("(")?;
        write_formula(a, ab, f)?;
        write!(f, ") {name} (")?;
        write_formula(b, ab, f)?;
        f.write_str(")")
    };
    match phi {
        Formula::Atom(s) => f.write_str(ab.name(*s)),
        Formula::True => f.write_str("true"),
        Formula::False => f.write_str("false"),
        Formula::Not(a) => unary("!", a, f),
        Formula::Next(a) => unary("X", a, f),
        Formula::Finally(a) => unary("F", a, f),
        Formula::Globally(a) => unary("G", a, f),
        Formula::And(a, b) => binary("&", a, b, f),
        Formula::Or(a, b) => binary("|", a, b, f),
        Formula::Implies(a, b) => binary("->", a, b, f),
        Formula::Until(a, b) => binary("U", a, b, f),
    }
}
