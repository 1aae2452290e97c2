//! Minimal LTL formulas consistent with a labelled sample, found by SAT.
//!
//! For growing size bounds `n` the learner builds `Φ_n^S` (see
//! [`encode`]) and asks the solver for a model. Satisfiability is monotone in
//! `n`, so the first satisfiable bound under iterative deepening, or the
//! boundary found by binary search, is the minimal formula size.

mod encode;
pub mod sat;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{Alphabet, Word};
use crate::ltl::{CompiledFormula, Formula, Op};

pub use encode::{encode, SyntaxDagEncoding};
use sat::{SolveResult, Solver};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("no consistent formula with at most {max_size} nodes")]
    SizeCapExceeded { max_size: usize },
    #[error("learner budget exhausted while searching size {size}")]
    BudgetExceeded { size: usize },
    #[error("decoded formula {formula} contradicts the sample on `{word}` (encoding bug)")]
    DecodeInconsistency { formula: String, word: String },
    #[error("failed to write DIMACS dump: {0}")]
    Dump(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("word `{word}` was labelled both 0 and 1")]
pub struct Contradiction {
    pub word: String,
}

/// Finite set of labelled words.
#[derive(Clone, Debug)]
pub struct Sample {
    alphabet: Alphabet,
    entries: BTreeMap<Word, bool>,
}

impl Sample {
    pub fn new(alphabet: Alphabet) -> Self {
        Sample { alphabet, entries: BTreeMap::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, bool)> {
        self.entries.iter().map(|(w, l)| (w, *l))
    }

    pub fn label(&self, word: &Word) -> Option<bool> {
        self.entries.get(word).copied()
    }

    /// Inserts one entry; `Ok(true)` if it was new.
    pub fn add(&mut self, word: Word, label: bool) -> Result<bool, Contradiction> {
        match self.entries.get(&word) {
            Some(&old) if old == label => Ok(false),
            Some(_) => Err(Contradiction { word: self.alphabet.render_word(&word) }),
            None => {
                self.entries.insert(word, label);
                Ok(true)
            }
        }
    }

    /// Folds counterexamples in; returns how many entries were new. Nothing is
    /// inserted if any entry contradicts the sample.
    pub fn add_counterexamples<I>(&mut self, ces: I) -> Result<usize, Contradiction>
    where
        I: IntoIterator<Item = (Word, bool)>,
    {
        let ces: Vec<(Word, bool)> = ces.into_iter().collect();
        let mut staged: BTreeMap<&Word, bool> = BTreeMap::new();
        for (w, l) in &ces {
            let prior = self.entries.get(w).copied().or(staged.get(w).copied());
            if prior.is_some_and(|p| p != *l) {
                return Err(Contradiction { word: self.alphabet.render_word(w) });
            }
            staged.insert(w, *l);
        }
        let mut added = 0;
        for (w, l) in ces {
            if self.add(w, l).expect("checked above") {
                added += 1;
            }
        }
        Ok(added)
    }

    /// Whether `phi` agrees with every entry; returns the first disagreement otherwise.
    pub fn first_inconsistency(&self, phi: &Formula) -> Option<&Word> {
        let compiled = CompiledFormula::new(phi);
        self.entries
            .iter()
            .find(|(w, l)| compiled.satisfies(w) != **l)
            .map(|(w, _)| w)
    }

    pub fn is_consistent(&self, phi: &Formula) -> bool {
        self.first_inconsistency(phi).is_none()
    }

    pub fn total_length(&self) -> usize {
        self.entries.keys().map(Word::len).sum()
    }
}

/// Which operators the learner may use besides atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorSet {
    pub top: bool,
    pub bottom: bool,
    pub not: bool,
    pub and: bool,
    pub or: bool,
    pub implies: bool,
    pub next: bool,
    pub finally: bool,
    pub globally: bool,
    pub until: bool,
}

impl OperatorSet {
    /// Every operator including the derived ones.
    pub fn full() -> Self {
        OperatorSet {
            top: true,
            bottom: true,
            not: true,
            and: true,
            or: true,
            implies: true,
            next: true,
            finally: true,
            globally: true,
            until: true,
        }
    }

    /// Only the primitive grammar: atoms, `¬`, `∨`, `X`, `U`.
    pub fn core() -> Self {
        OperatorSet {
            top: false,
            bottom: false,
            not: true,
            and: false,
            or: true,
            implies: false,
            next: true,
            finally: false,
            globally: false,
            until: true,
        }
    }

    pub fn none() -> Self {
        OperatorSet {
            top: false,
            bottom: false,
            not: false,
            and: false,
            or: false,
            implies: false,
            next: false,
            finally: false,
            globally: false,
            until: false,
        }
    }

    /// Enabled non-atomic labels in a fixed order.
    pub fn enabled(&self) -> Vec<Op> {
        [
            (self.top, Op::True),
            (self.bottom, Op::False),
            (self.not, Op::Not),
            (self.and, Op::And),
            (self.or, Op::Or),
            (self.implies, Op::Implies),
            (self.next, Op::Next),
            (self.finally, Op::Finally),
            (self.globally, Op::Globally),
            (self.until, Op::Until),
        ]
        .into_iter()
        .filter_map(|(on, op)| on.then_some(op))
        .collect()
    }

    pub fn allows(&self, op: Op) -> bool {
        matches!(op, Op::Atom(_)) || self.enabled().contains(&op)
    }

    /// Whether every operator in `phi` is enabled.
    pub fn admits(&self, phi: &Formula) -> bool {
        phi.subformulas().iter().all(|f| self.allows(f.op()))
    }

    fn has_combinator(&self) -> bool {
        self.and || self.or || self.implies || self.next || self.finally || self.globally || self.until
    }
}

impl Default for OperatorSet {
    fn default() -> Self {
        Self::full()
    }
}

impl FromStr for OperatorSet {
    type Err = String;

    /// `full`, `core`, or a comma list of `true,false,not,and,or,implies,X,F,G,U`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "full" => return Ok(Self::full()),
            "core" => return Ok(Self::core()),
            _ => {}
        }
        let mut ops = Self::none();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "true" => ops.top = true,
                "false" => ops.bottom = true,
                "not" | "!" => ops.not = true,
                "and" | "&" => ops.and = true,
                "or" | "|" => ops.or = true,
                "implies" | "->" => ops.implies = true,
                "X" => ops.next = true,
                "F" => ops.finally = true,
                "G" => ops.globally = true,
                "U" => ops.until = true,
                other => return Err(format!("unknown operator `{other}`")),
            }
        }
        if !ops.has_combinator() {
            return Err("operator set needs at least one of and, or, implies, X, F, G, U".into());
        }
        Ok(ops)
    }
}

impl fmt::Display for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::full() {
            return f.write_str("full");
        }
        if *self == Self::core() {
            return f.write_str("core");
        }
        let names: Vec<&str> = self
            .enabled()
            .into_iter()
            .map(|op| match op {
                Op::True => "true",
                Op::False => "false",
                Op::Not => "not",
                Op::And => "and",
                Op::Or => "or",
                Op::Implies => "implies",
                Op::Next => "X",
                Op::Finally => "F",
                Op::Globally => "G",
                Op::Until => "U",
                Op::Atom(_) => unreachable!(),
            })
            .collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStrategy {
    IterativeDeepening,
    /// Binary search below an initial upper bound, which is doubled until satisfiable.
    BinarySearch { upper: usize },
}

#[derive(Clone, Debug)]
pub struct LearnerConfig {
    pub ops: OperatorSet,
    pub max_size: usize,
    pub time_budget: Option<Duration>,
    pub strategy: SearchStrategy,
    /// When set, every encoding is written there as `phi_n<N>_<k>.cnf`.
    pub dimacs_dir: Option<PathBuf>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            ops: OperatorSet::full(),
            max_size: 12,
            time_budget: None,
            strategy: SearchStrategy::IterativeDeepening,
            dimacs_dir: None,
        }
    }
}

/// Outcome of one satisfiability check.
#[derive(Clone, Debug, Serialize)]
pub struct SolveRecord {
    pub size: usize,
    pub satisfiable: bool,
    pub variables: usize,
    pub clauses: usize,
    pub conflicts: u64,
    pub secs: f64,
}

#[derive(Clone, Debug)]
pub struct Learned {
    pub formula: Formula,
    pub size: usize,
    pub solves: Vec<SolveRecord>,
}

enum Check {
    Sat(Formula),
    Unsat,
}

struct Search<'a> {
    sample: &'a Sample,
    cfg: &'a LearnerConfig,
    deadline: Option<Instant>,
    solves: Vec<SolveRecord>,
}

impl Search<'_> {
    fn check(&mut self, n: usize) -> Result<Check, LearnError> {
        let started = Instant::now();
        let enc = encode(self.sample, n, &self.cfg.ops);
        if let Some(dir) = &self.cfg.dimacs_dir {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("phi_n{n}_{}.cnf", self.solves.len()));
            enc.cnf().write_dimacs(std::io::BufWriter::new(std::fs::File::create(path)?))?;
        }
        let mut solver = Solver::from_cnf(enc.cnf());
        solver.set_deadline(self.deadline);
        let result = solver.solve();
        self.solves.push(SolveRecord {
            size: n,
            satisfiable: result == SolveResult::Sat,
            variables: enc.cnf().num_vars(),
            clauses: enc.cnf().clauses().len(),
            conflicts: solver.conflicts(),
            secs: started.elapsed().as_secs_f64(),
        });
        match result {
            SolveResult::Unknown => Err(LearnError::BudgetExceeded { size: n }),
            SolveResult::Unsat => Ok(Check::Unsat),
            SolveResult::Sat => {
                let formula = enc.decode(solver.model());
                if let Some(w) = self.sample.first_inconsistency(&formula) {
                    return Err(LearnError::DecodeInconsistency {
                        formula: formula.to_text(self.sample.alphabet()),
                        word: self.sample.alphabet().render_word(w),
                    });
                }
                Ok(Check::Sat(formula))
            }
        }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

pub fn learn_minimal(sample: &Sample, cfg: &LearnerConfig) -> Result<Learned, LearnError> {
    learn_minimal_until(sample, cfg, None)
}

/// Like [`learn_minimal`], additionally stopping at an absolute deadline.
pub fn learn_minimal_until(
    sample: &Sample,
    cfg: &LearnerConfig,
    deadline: Option<Instant>,
) -> Result<Learned, LearnError> {
    assert!(cfg.max_size >= 1, "max_size must be positive");
    if sample.is_empty() {
        return Ok(Learned { formula: Formula::True, size: 1, solves: Vec::new() });
    }
    let budget_deadline = cfg.time_budget.map(|b| Instant::now() + b);
    let deadline = match (deadline, budget_deadline) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let mut search = Search { sample, cfg, deadline, solves: Vec::new() };

    let found = match cfg.strategy {
        SearchStrategy::IterativeDeepening => {
            let mut found = None;
            for n in 1..=cfg.max_size {
                if search.expired() {
                    return Err(LearnError::BudgetExceeded { size: n });
                }
                if let Check::Sat(f) = search.check(n)? {
                    found = Some((n, f));
                    break;
                }
            }
            found
        }
        SearchStrategy::BinarySearch { upper } => {
            let mut hi = upper.clamp(1, cfg.max_size);
            let mut lo = 0;
            // Grow the upper bound until satisfiable.
            let mut best = loop {
                match search.check(hi)? {
                    Check::Sat(f) => break Some(f),
                    Check::Unsat if hi == cfg.max_size => break None,
                    Check::Unsat => {
                        lo = hi;
                        hi = (hi * 2).min(cfg.max_size);
                    }
                }
            };
            // Invariant: Φ_lo unsat (or lo = 0), Φ_hi sat.
            if best.is_some() {
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    match search.check(mid)? {
                        Check::Sat(f) => {
                            hi = mid;
                            best = Some(f);
                        }
                        Check::Unsat => lo = mid,
                    }
                }
            }
            best.map(|f| (hi, f))
        }
    };

    match found {
        Some((n, formula)) => {
            debug_assert!(formula.size() <= n);
            Ok(Learned { size: formula.size(), formula, solves: search.solves })
        }
        None => Err(LearnError::SizeCapExceeded { max_size: cfg.max_size }),
    }
}
