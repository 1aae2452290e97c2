//! Black-box word classifiers.
//!
//! Every backend answers the same question: is the word accepted? Pure
//! backends may be queried from many threads; a subprocess is queried one
//! word at a time.

pub mod builtin;
mod dfa;
mod lstm;
mod process;

use std::path::Path;
use std::time::Duration;

use thiserror::Error;

use crate::alphabet::{Alphabet, Word};
use crate::ltl::{parse_ltl, CompiledFormula, Formula};

pub use dfa::{Dfa, RunEnd};
pub use lstm::{Classifier, LstmLayer, LstmModel};
pub use process::{Subprocess, DEFAULT_REPLY_TIMEOUT};

#[derive(Debug, Error)]
pub enum AcceptorError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("invalid acceptor file: {0}")]
    Schema(String),
    #[error("unknown builtin `{0}` (known: balanced-parens, email, alternating-bit)")]
    UnknownBuiltin(String),
    #[error("bad acceptor spec `{0}`: expected dfa:, ltl:, counter:, builtin:, lstm: or proc:")]
    BadSpec(String),
    #[error("acceptor alphabet {acceptor} differs from the requested alphabet {requested}")]
    AlphabetMismatch { acceptor: String, requested: String },
    #[error("oracle formula: {0}")]
    Formula(String),
    #[error("subprocess failed on `{word}`: {reason}")]
    Subprocess { word: String, reason: String },
}

pub enum Backend {
    Dfa(Dfa),
    Ltl { formula: Formula, compiled: CompiledFormula },
    /// Per-symbol counter delta. Accepts when the running sum never drops
    /// below zero and ends at zero.
    Counter(Vec<i64>),
    Lstm(LstmModel),
    Subprocess(Subprocess),
}

pub struct Acceptor {
    spec: String,
    alphabet: Alphabet,
    backend: Backend,
}

impl Acceptor {
    pub fn new(spec: impl Into<String>, alphabet: Alphabet, backend: Backend) -> Self {
        Acceptor { spec: spec.into(), alphabet, backend }
    }

    pub fn from_dfa(dfa: Dfa) -> Self {
        Acceptor::new("dfa", dfa.alphabet().clone(), Backend::Dfa(dfa))
    }

    pub fn from_formula(formula: Formula, alphabet: Alphabet) -> Self {
        let spec = format!("ltl:{}", formula.to_text(&alphabet));
        let compiled = CompiledFormula::new(&formula);
        Acceptor::new(spec, alphabet, Backend::Ltl { formula, compiled })
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Whether queries may run concurrently.
    pub fn is_pure(&self) -> bool {
        !matches!(self.backend, Backend::Subprocess(_))
    }

    pub fn accepts(&self, word: &Word) -> Result<bool, AcceptorError> {
        debug_assert!(word.is_over(&self.alphabet));
        Ok(match &self.backend {
            Backend::Dfa(d) => d.accepts(word),
            Backend::Ltl { compiled, .. } => compiled.satisfies(word),
            Backend::Counter(deltas) => counter_accepts(deltas, word),
            Backend::Lstm(m) => m.accepts(word),
            Backend::Subprocess(p) => return p.query(&self.alphabet, word),
        })
    }
}

impl std::fmt::Debug for Acceptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Acceptor").field("spec", &self.spec).field("alphabet", &self.alphabet.to_string()).finish()
    }
}

fn counter_accepts(deltas: &[i64], word: &Word) -> bool {
    let mut level = 0i64;
    for sym in word.iter() {
        level += deltas[sym.index()];
        if level < 0 {
            return false;
        }
    }
    level == 0
}

/// Alphabet used for `ltl:` and `proc:` acceptors when none is given.
pub fn default_alphabet() -> Alphabet {
    Alphabet::new(["a", "b", "c"]).expect("valid alphabet")
}

fn check_alphabet(own: &Alphabet, requested: Option<&Alphabet>) -> Result<(), AcceptorError> {
    match requested {
        Some(req) if req != own => Err(AcceptorError::AlphabetMismatch {
            acceptor: own.to_string(),
            requested: req.to_string(),
        }),
        _ => Ok(()),
    }
}

/// Builds an acceptor from `kind:argument`.
///
/// `dfa:`, `lstm:` and `builtin:` acceptors carry their own alphabet, and a
/// requested alphabet must match it. `ltl:` and `proc:` use the requested
/// alphabet, or `a,b,c`.
pub fn load_acceptor(spec: &str, alphabet: Option<&Alphabet>) -> Result<Acceptor, AcceptorError> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| AcceptorError::BadSpec(spec.to_string()))?;
    let with_own = |own: Alphabet, backend: Backend| -> Result<Acceptor, AcceptorError> {
        check_alphabet(&own, alphabet)?;
        Ok(Acceptor::new(spec, own, backend))
    };
    match kind {
        "dfa" => {
            let dfa = Dfa::load(Path::new(arg))?;
            with_own(dfa.alphabet().clone(), Backend::Dfa(dfa))
        }
        "lstm" => {
            let model = LstmModel::load(Path::new(arg))?;
            with_own(model.alphabet().clone(), Backend::Lstm(model))
        }
        "ltl" => {
            let ab = alphabet.cloned().unwrap_or_else(default_alphabet);
            let formula = parse_ltl(arg, &ab).map_err(|e| AcceptorError::Formula(e.to_string()))?;
            let compiled = CompiledFormula::new(&formula);
            Ok(Acceptor::new(spec, ab, Backend::Ltl { formula, compiled }))
        }
        "counter" if arg == "balanced-parens" => {
            with_own(builtin::parens_alphabet(), Backend::Counter(builtin::parens_deltas()))
        }
        "counter" => Err(AcceptorError::UnknownBuiltin(arg.to_string())),
        "builtin" => match arg {
            "balanced-parens" => with_own(builtin::parens_alphabet(), Backend::Counter(builtin::parens_deltas())),
            "email" => with_own(builtin::email_alphabet(), Backend::Dfa(builtin::email())),
            "alternating-bit" => with_own(builtin::alternating_bit_alphabet(), Backend::Dfa(builtin::alternating_bit())),
            other => Err(AcceptorError::UnknownBuiltin(other.to_string())),
        },
        "proc" => {
            let ab = alphabet.cloned().unwrap_or_else(default_alphabet);
            let p = Subprocess::spawn(arg, DEFAULT_REPLY_TIMEOUT)?;
            Ok(Acceptor::new(spec, ab, Backend::Subprocess(p)))
        }
        _ => Err(AcceptorError::BadSpec(spec.to_string())),
    }
}

/// Like [`load_acceptor`] with an explicit reply timeout for `proc:` specs.
pub fn load_acceptor_with_timeout(
    spec: &str,
    alphabet: Option<&Alphabet>,
    timeout: Duration,
) -> Result<Acceptor, AcceptorError> {
    match spec.strip_prefix("proc:") {
        Some(cmd) => {
            let ab = alphabet.cloned().unwrap_or_else(default_alphabet);
            Ok(Acceptor::new(spec, ab, Backend::Subprocess(Subprocess::spawn(cmd, timeout)?)))
        }
        None => load_acceptor(spec, alphabet),
    }
}
