//! Sampling-based conformance check between a conjecture and the acceptor
//! restricted to the query.

use std::f64::consts::LN_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use thiserror::Error;

use crate::acceptor::{Acceptor, AcceptorError, Dfa};
use crate::alphabet::Word;
use crate::ltl::{CompiledFormula, Formula};
use crate::sampling::WordSampler;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("acceptor failed on `{word}`: {source}")]
    Backend {
        word: String,
        #[source]
        source: AcceptorError,
    },
    #[error("accuracy needs a non-empty suite")]
    EmptySuite,
    #[error("early-stop bounds need at least two tested words, got {0}")]
    TooFewWords(usize),
}

/// Anything that labels words: conjectured formulas, DFAs.
pub trait Classifier: Sync {
    fn classify(&self, word: &Word) -> bool;
}

impl Classifier for CompiledFormula {
    fn classify(&self, word: &Word) -> bool {
        self.satisfies(word)
    }
}

impl Classifier for Dfa {
    fn classify(&self, word: &Word) -> bool {
        self.accepts(word)
    }
}

/// The language being explained: words accepted by the acceptor that also satisfy the query.
pub struct Target<'a> {
    acceptor: &'a Acceptor,
    query: CompiledFormula,
}

impl<'a> Target<'a> {
    pub fn new(acceptor: &'a Acceptor, query: &Formula) -> Self {
        Target { acceptor, query: CompiledFormula::new(query) }
    }

    pub fn acceptor(&self) -> &Acceptor {
        self.acceptor
    }

    /// Expected label: accepted and inside the query.
    pub fn label(&self, word: &Word) -> Result<bool, VerifyError> {
        if !self.query.satisfies(word) {
            return Ok(false);
        }
        self.acceptor.accepts(word).map_err(|source| VerifyError::Backend {
            word: self.acceptor.alphabet().render_word(word),
            source,
        })
    }

    /// Labels in suite order; evaluated in parallel for pure acceptors.
    pub fn labels(&self, suite: &[Word]) -> Result<Vec<bool>, VerifyError> {
        if self.acceptor.is_pure() {
            suite.par_iter().map(|w| self.label(w)).collect()
        } else {
            suite.iter().map(|w| self.label(w)).collect()
        }
    }
}

/// `⌈(i ln 2 − ln δ) / ε⌉`.
pub fn suite_size(iteration: usize, epsilon: f64, delta: f64) -> usize {
    assert!(iteration >= 1, "iterations count from 1");
    assert!(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0, "ε and δ must lie in (0, 1)");
    ((iteration as f64 * LN_2 - delta.ln()) / epsilon).ceil() as usize
}

/// Closed form of `Σ_{i=1..m} suite_size(i)` without the ceilings, plus `m` for them.
pub fn total_tested_bound(iterations: usize, epsilon: f64, delta: f64) -> f64 {
    let m = iterations as f64;
    m + (LN_2 * m * (m + 1.0) / 2.0 + m * (1.0 / delta).ln()) / epsilon
}

/// Counterexample check: `Some(expected)` when the conjecture disagrees with the target.
pub fn is_counterexample<C: Classifier + ?Sized>(
    word: &Word,
    conjecture: &C,
    target: &Target,
) -> Result<Option<bool>, VerifyError> {
    let expected = target.label(word)?;
    Ok((conjecture.classify(word) != expected).then_some(expected))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    FirstFailure,
    #[default]
    CollectAll,
}

impl std::str::FromStr for BatchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-failure" => Ok(BatchMode::FirstFailure),
            "collect-all" => Ok(BatchMode::CollectAll),
            _ => Err(format!("unknown batch mode `{s}` (first-failure or collect-all)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub word: Word,
    pub expected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationOutcome {
    pub suite_size: usize,
    pub tested: usize,
    /// Mismatches over the whole suite, `k`.
    pub mismatches: usize,
    /// In suite order; only the first one under first-failure mode.
    pub counterexamples: Vec<Counterexample>,
}

impl VerificationOutcome {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks a conjecture on a given suite. Every word is tested, so `mismatches`
/// is exact in both modes.
pub fn verify_suite<C: Classifier + ?Sized>(
    conjecture: &C,
    target: &Target,
    suite: &[Word],
    mode: BatchMode,
) -> Result<VerificationOutcome, VerifyError> {
    let labels = target.labels(suite)?;
    let mut counterexamples: Vec<Counterexample> = suite
        .iter()
        .zip(labels)
        .filter(|(w, expected)| conjecture.classify(w) != *expected)
        .map(|(w, expected)| Counterexample { word: w.clone(), expected })
        .collect();
    let mismatches = counterexamples.len();
    if mode == BatchMode::FirstFailure {
        counterexamples.truncate(1);
    }
    Ok(VerificationOutcome { suite_size: suite.len(), tested: suite.len(), mismatches, counterexamples })
}

/// Draws the `iteration`-th suite and checks the conjecture against it.
#[allow(clippy::too_many_arguments)]
pub fn verify<C: Classifier + ?Sized, R: Rng + ?Sized>(
    conjecture: &C,
    target: &Target,
    iteration: usize,
    epsilon: f64,
    delta: f64,
    sampler: &WordSampler,
    rng: &mut R,
    mode: BatchMode,
) -> Result<VerificationOutcome, VerifyError> {
    let suite = sampler.sample_suite(suite_size(iteration, epsilon, delta), rng);
    verify_suite(conjecture, target, &suite, mode)
}

/// Confidence and error level salvageable from a suite with `k` mismatches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopStats {
    pub r_i: usize,
    pub k: usize,
    pub delta_prime: f64,
    /// `ln δ′`, finite even when `δ′` overflows.
    pub ln_delta_prime: f64,
    pub epsilon_prime: f64,
    pub vacuous: bool,
}

fn six_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let digits = 6 - 1 - x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

/// `δ′ = C(r, k) e^{−ε(r−k)}` and `ε′ = (ln C(r, k) − ln δ) / (r − 1)`.
pub fn early_stop_bounds(r_i: usize, k: usize, epsilon: f64, delta: f64) -> Result<EarlyStopStats, VerifyError> {
    if r_i < 2 {
        return Err(VerifyError::TooFewWords(r_i));
    }
    assert!(k <= r_i, "more mismatches than words");
    let ln_c = ln_binomial(r_i as u64, k as u64);
    let ln_delta_prime = ln_c - epsilon * (r_i - k) as f64;
    let delta_prime = six_significant(ln_delta_prime.exp());
    let epsilon_prime = six_significant((ln_c - delta.ln()) / (r_i - 1) as f64);
    Ok(EarlyStopStats {
        r_i,
        k,
        delta_prime,
        ln_delta_prime: six_significant(ln_delta_prime),
        epsilon_prime,
        vacuous: delta_prime >= 1.0 || epsilon_prime >= 1.0,
    })
}

/// Fraction of the suite on which the classifier agrees with the target.
pub fn accuracy<C: Classifier + ?Sized>(conjecture: &C, target: &Target, suite: &[Word]) -> Result<f64, VerifyError> {
    if suite.is_empty() {
        return Err(VerifyError::EmptySuite);
    }
    let labels = target.labels(suite)?;
    let agree = suite.iter().zip(labels).filter(|(w, l)| conjecture.classify(w) == *l).count();
    Ok(agree as f64 / suite.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acceptor::load_acceptor;
    use crate::ltl::parse_ltl;
    use crate::sampling::{stream_rng, DistributionSpec};

    #[test]
    fn suite_sizes() {
        assert_eq!(suite_size(1, 0.05, 0.05), 74);
        assert_eq!(suite_size(2, 0.05, 0.05), 88);
        assert_eq!(suite_size(1, 0.5, 0.5), 3);
    }

    #[test]
    fn bounds_examples() {
        let s = early_stop_bounds(74, 1, 0.05, 0.05).unwrap();
        assert!((s.delta_prime - 1.923).abs() < 1e-3, "{}", s.delta_prime);
        assert!((s.epsilon_prime - 0.100).abs() < 1e-3, "{}", s.epsilon_prime);
        assert!(s.vacuous);
        let s = early_stop_bounds(74, 0, 0.05, 0.05).unwrap();
        assert!((s.delta_prime - (-3.7f64).exp()).abs() < 1e-6);
        assert!(!s.vacuous);
        assert!(early_stop_bounds(1, 0, 0.05, 0.05).is_err());
        // The binomial coefficient overflows here; the log stays usable.
        let s = early_stop_bounds(5000, 2500, 0.05, 0.05).unwrap();
        assert!(s.ln_delta_prime.is_finite() && s.epsilon_prime.is_finite());
        assert!(s.vacuous);
    }

    #[test]
    fn counterexample_examples() {
        let a = load_acceptor("ltl:F(a)", None).unwrap();
        let ab = a.alphabet().clone();
        let w = |s: &str| ab.parse_word(s).unwrap();
        let f = |s: &str| parse_ltl(s, &ab).unwrap();
        let top = CompiledFormula::new(&Formula::True);
        assert_eq!(is_counterexample(&w("bb"), &top, &Target::new(&a, &Formula::True)).unwrap(), Some(false));
        let phi = CompiledFormula::new(&f("F(a) & F(b)"));
        assert_eq!(is_counterexample(&w("ab"), &phi, &Target::new(&a, &f("F(b)"))).unwrap(), None);
        let bot = CompiledFormula::new(&Formula::False);
        let t = Target::new(&a, &Formula::False);
        for u in ab.words_up_to(3) {
            assert_eq!(is_counterexample(&u, &bot, &t).unwrap(), None);
        }
    }

    #[test]
    fn verify_modes() {
        let a = load_acceptor("ltl:F(a)", None).unwrap();
        let target = Target::new(&a, &Formula::True);
        let sampler = WordSampler::new(DistributionSpec::default(), a.alphabet()).unwrap();
        let exact = CompiledFormula::new(&parse_ltl("F(a)", a.alphabet()).unwrap());
        let out = verify(&exact, &target, 1, 0.05, 0.05, &sampler, &mut stream_rng(3, 0), BatchMode::CollectAll).unwrap();
        assert!(out.passed());
        assert_eq!(out.tested, 74);

        let wrong = CompiledFormula::new(&Formula::True);
        let all = verify(&wrong, &target, 1, 0.05, 0.05, &sampler, &mut stream_rng(3, 0), BatchMode::CollectAll).unwrap();
        let first = verify(&wrong, &target, 1, 0.05, 0.05, &sampler, &mut stream_rng(3, 0), BatchMode::FirstFailure).unwrap();
        assert!(all.mismatches >= 1);
        assert_eq!(all.mismatches, first.mismatches);
        assert_eq!(first.counterexamples.len(), 1);
        assert_eq!(first.counterexamples[0], all.counterexamples[0]);
        for ce in &all.counterexamples {
            assert!(!ce.expected);
            assert_eq!(is_counterexample(&ce.word, &wrong, &target).unwrap(), Some(false));
        }
    }

    #[test]
    fn accuracy_examples() {
        let a = load_acceptor("ltl:F(a)", None).unwrap();
        let ab = a.alphabet().clone();
        let target = Target::new(&a, &Formula::True);
        let suite: Vec<Word> = ab.words_up_to(4).collect();
        let fa = CompiledFormula::new(&parse_ltl("F(a)", &ab).unwrap());
        let not_fa = CompiledFormula::new(&parse_ltl("!F(a)", &ab).unwrap());
        assert_eq!(accuracy(&fa, &target, &suite).unwrap(), 1.0);
        assert_eq!(accuracy(&not_fa, &target, &suite).unwrap(), 0.0);
        let ga = CompiledFormula::new(&parse_ltl("G(a)", &ab).unwrap());
        assert!(accuracy(&ga, &target, &[ab.parse_word("ab").unwrap()]).unwrap() < 1.0);
        assert!(matches!(accuracy(&fa, &target, &[]), Err(VerifyError::EmptySuite)));
    }
}
