//! The learner/verifier loop and the run reports built on it.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::acceptor::{load_acceptor, Acceptor, AcceptorError};
use crate::alphabet::{Alphabet, AlphabetError, Word};
use crate::learner::{learn_minimal_until, LearnError, LearnerConfig, OperatorSet, Sample, SearchStrategy};
use crate::lstar::{lstar_learn, LstarBudget};
use crate::ltl::{parse_ltl, CompiledFormula, Formula};
use crate::sampling::{stream_rng, DistError, DistributionSpec, WordSampler, EVAL_STREAM, VERIFIER_STREAM};
use crate::verifier::{accuracy, early_stop_bounds, verify, BatchMode, Target, VerifyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Acceptor(#[from] AcceptorError),
    #[error("alphabet: {0}")]
    Alphabet(#[from] AlphabetError),
    #[error("query: {0}")]
    Query(String),
    #[error("formula: {0}")]
    Formula(String),
    #[error("distribution: {0}")]
    Dist(#[from] DistError),
    #[error("operators: {0}")]
    Ops(String),
    #[error("epsilon and delta must lie strictly between 0 and 1")]
    Parameters,
    #[error("{0}")]
    Other(String),
}

/// Inputs of one explanation run. Serialized verbatim as the report's config echo.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub acceptor: String,
    pub query: String,
    /// Comma-separated; `None` uses the acceptor's own alphabet.
    pub alphabet: Option<String>,
    pub epsilon: f64,
    pub delta: f64,
    pub dist: String,
    pub seed: u64,
    pub timeout_secs: f64,
    pub max_iterations: usize,
    pub ops: String,
    pub batch: BatchMode,
    pub max_size: usize,
    pub eval_size: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            acceptor: String::new(),
            query: "true".into(),
            alphabet: None,
            epsilon: 0.05,
            delta: 0.05,
            dist: crate::sampling::DEFAULT_DIST.into(),
            seed: 0,
            timeout_secs: 400.0,
            max_iterations: 30,
            ops: "full".into(),
            batch: BatchMode::CollectAll,
            max_size: 20,
            eval_size: 2000,
        }
    }
}

impl ExplainConfig {
    pub fn new(acceptor: impl Into<String>, query: impl Into<String>) -> Self {
        ExplainConfig { acceptor: acceptor.into(), query: query.into(), ..Default::default() }
    }
}

/// Everything a run needs, resolved and validated up front.
pub struct Prepared {
    pub acceptor: Acceptor,
    pub query: Formula,
    pub sampler: WordSampler,
    pub ops: OperatorSet,
}

impl Prepared {
    pub fn new(cfg: &ExplainConfig) -> Result<Self, ConfigError> {
        if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0 && cfg.delta > 0.0 && cfg.delta < 1.0) {
            return Err(ConfigError::Parameters);
        }
        let alphabet = cfg.alphabet.as_deref().map(Alphabet::parse_list).transpose()?;
        let acceptor = load_acceptor(&cfg.acceptor, alphabet.as_ref())?;
        Self::with_acceptor(cfg, acceptor)
    }

    pub fn with_acceptor(cfg: &ExplainConfig, acceptor: Acceptor) -> Result<Self, ConfigError> {
        let query = parse_ltl(&cfg.query, acceptor.alphabet()).map_err(|e| ConfigError::Query(e.to_string()))?;
        let dist: DistributionSpec = cfg.dist.parse()?;
        let sampler = WordSampler::new(dist, acceptor.alphabet())?;
        let ops: OperatorSet = cfg.ops.parse().map_err(ConfigError::Ops)?;
        Ok(Prepared { acceptor, query, sampler, ops })
    }

    pub fn target(&self) -> Target<'_> {
        Target::new(&self.acceptor, &self.query)
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.acceptor.alphabet()
    }

    /// Fresh evaluation suite, independent of the verifier's draws.
    pub fn eval_suite(&self, seed: u64, size: usize) -> Vec<Word> {
        self.sampler.sample_suite(size, &mut stream_rng(seed, EVAL_STREAM))
    }
}

/// SHA-256 over the rendered suite, one word per line.
pub fn suite_hash(alphabet: &Alphabet, suite: &[Word]) -> String {
    let mut h = Sha256::new();
    for w in suite {
        h.update(alphabet.render_word(w).as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledWord {
    pub word: String,
    pub label: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub conjecture: String,
    pub size: usize,
    pub r_i: usize,
    pub mismatches: usize,
    pub counterexamples: Vec<LabelledWord>,
    pub learner_secs: f64,
    pub verifier_secs: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    PacPass {
        formula: String,
        size: usize,
        total_words_tested: usize,
    },
    EarlyStop {
        formula: String,
        size: usize,
        reason: String,
        r_i: usize,
        k: usize,
        delta_prime: f64,
        epsilon_prime: f64,
        vacuous: bool,
    },
    Failed {
        error: String,
    },
}

impl Outcome {
    pub fn formula(&self) -> Option<&str> {
        match self {
            Outcome::PacPass { formula, .. } | Outcome::EarlyStop { formula, .. } => Some(formula),
            Outcome::Failed { .. } => None,
        }
    }

    pub fn size(&self) -> Option<usize> {
        match self {
            Outcome::PacPass { size, .. } | Outcome::EarlyStop { size, .. } => Some(*size),
            Outcome::Failed { .. } => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::PacPass { .. } => "PacPass",
            Outcome::EarlyStop { .. } => "EarlyStop",
            Outcome::Failed { .. } => "Failed",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timings {
    pub total_secs: f64,
    pub learner_secs: f64,
    pub verifier_secs: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub config: ExplainConfig,
    pub iterations: Vec<IterationRecord>,
    pub outcome: Outcome,
    pub accuracy: Option<f64>,
    pub eval_suite_size: usize,
    pub eval_suite_hash: String,
    pub timings: Timings,
}

impl ExplanationReport {
    /// The explanation, re-parsed over the run's alphabet.
    pub fn formula(&self, alphabet: &Alphabet) -> Option<Formula> {
        self.outcome.formula().map(|f| parse_ltl(f, alphabet).expect("reports hold printable formulas"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Optional side outputs of a run.
#[derive(Clone, Debug, Default)]
pub struct RunHooks {
    /// Append-only counterexample log, one JSON object per line.
    pub counterexample_log: Option<PathBuf>,
}

#[derive(Serialize)]
struct LogLine<'a> {
    seed: u64,
    acceptor: &'a str,
    query: &'a str,
    iteration: usize,
    word: &'a str,
    label: u8,
}

fn append_log(path: &PathBuf, cfg: &ExplainConfig, iteration: usize, ces: &[LabelledWord]) -> std::io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    for ce in ces {
        let line = LogLine {
            seed: cfg.seed,
            acceptor: &cfg.acceptor,
            query: &cfg.query,
            iteration,
            word: &ce.word,
            label: ce.label,
        };
        writeln!(file, "{}", serde_json::to_string(&line).expect("log line serializes"))?;
    }
    Ok(())
}

/// Loads everything named in the config and runs the loop.
pub fn explain(cfg: &ExplainConfig, hooks: &RunHooks) -> Result<ExplanationReport, ConfigError> {
    let prepared = Prepared::new(cfg)?;
    Ok(explain_prepared(cfg, &prepared, hooks))
}

/// Alternates minimal-formula learning and sampled verification until a
/// conjecture passes or the budget runs out.
pub fn explain_prepared(cfg: &ExplainConfig, p: &Prepared, hooks: &RunHooks) -> ExplanationReport {
    let started = Instant::now();
    let deadline = started + Duration::from_secs_f64(cfg.timeout_secs.max(0.0));
    let alphabet = p.alphabet();
    let target = p.target();
    let learner = LearnerConfig {
        ops: p.ops,
        max_size: cfg.max_size,
        time_budget: None,
        strategy: SearchStrategy::IterativeDeepening,
        dimacs_dir: None,
    };
    let mut rng = stream_rng(cfg.seed, VERIFIER_STREAM);
    let mut sample = Sample::new(alphabet.clone());
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut timings = Timings::default();
    let mut last: Option<(Formula, usize, usize)> = None; // conjecture, r_i, k
    let mut total_tested = 0;

    let early_stop = |last: &Option<(Formula, usize, usize)>, reason: String| match last {
        Some((phi, r, k)) => {
            let b = early_stop_bounds(*r, *k, cfg.epsilon, cfg.delta).expect("suites have at least two words");
            Outcome::EarlyStop {
                formula: phi.to_text(alphabet),
                size: phi.size(),
                reason,
                r_i: b.r_i,
                k: b.k,
                delta_prime: b.delta_prime,
                epsilon_prime: b.epsilon_prime,
                vacuous: b.vacuous,
            }
        }
        None => Outcome::Failed { error: format!("{reason} before the first verification") },
    };

    let outcome = 'run: {
        for i in 1..=cfg.max_iterations {
            if Instant::now() >= deadline {
                break 'run early_stop(&last, "timeout".into());
            }
            let t0 = Instant::now();
            let learned = learn_minimal_until(&sample, &learner, Some(deadline));
            let learner_secs = t0.elapsed().as_secs_f64();
            timings.learner_secs += learner_secs;
            let phi = match learned {
                Ok(l) => l.formula,
                Err(LearnError::BudgetExceeded { size }) => {
                    break 'run early_stop(&last, format!("timeout while learning (size {size})"))
                }
                Err(LearnError::SizeCapExceeded { max_size }) => {
                    break 'run early_stop(&last, format!("no consistent formula of size ≤ {max_size}"))
                }
                Err(e) => break 'run Outcome::Failed { error: e.to_string() },
            };
            let t1 = Instant::now();
            let compiled = CompiledFormula::new(&phi);
            let verified = verify(&compiled, &target, i, cfg.epsilon, cfg.delta, &p.sampler, &mut rng, cfg.batch);
            let verifier_secs = t1.elapsed().as_secs_f64();
            timings.verifier_secs += verifier_secs;
            let out = match verified {
                Ok(o) => o,
                Err(e) => break 'run Outcome::Failed { error: e.to_string() },
            };
            total_tested += out.tested;
            let ces: Vec<LabelledWord> = out
                .counterexamples
                .iter()
                .map(|c| LabelledWord { word: alphabet.render_word(&c.word), label: u8::from(c.expected) })
                .collect();
            if let Some(path) = &hooks.counterexample_log {
                if let Err(e) = append_log(path, cfg, i, &ces) {
                    break 'run Outcome::Failed { error: format!("counterexample log: {e}") };
                }
            }
            iterations.push(IterationRecord {
                index: i,
                conjecture: phi.to_text(alphabet),
                size: phi.size(),
                r_i: out.suite_size,
                mismatches: out.mismatches,
                counterexamples: ces,
                learner_secs,
                verifier_secs,
            });
            last = Some((phi.clone(), out.suite_size, out.mismatches));
            if out.passed() {
                break 'run Outcome::PacPass {
                    formula: phi.to_text(alphabet),
                    size: phi.size(),
                    total_words_tested: total_tested,
                };
            }
            let batch = out.counterexamples.into_iter().map(|c| (c.word, c.expected));
            if let Err(e) = sample.add_counterexamples(batch) {
                break 'run Outcome::Failed { error: format!("nondeterministic acceptor: {e}") };
            }
        }
        early_stop(&last, "iteration limit".into())
    };

    let suite = p.eval_suite(cfg.seed, cfg.eval_size);
    let eval_suite_hash = suite_hash(alphabet, &suite);
    let accuracy = outcome.formula().and_then(|f| {
        let phi = CompiledFormula::new(&parse_ltl(f, alphabet).expect("printed formulas parse"));
        accuracy(&phi, &target, &suite).ok()
    });
    timings.total_secs = started.elapsed().as_secs_f64();
    ExplanationReport {
        config: cfg.clone(),
        iterations,
        outcome,
        accuracy,
        eval_suite_size: suite.len(),
        eval_suite_hash,
        timings,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LtlSide {
    pub outcome: Outcome,
    pub size: Option<usize>,
    pub accuracy: Option<f64>,
    pub iterations: usize,
    pub secs: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DfaSide {
    pub states: Option<usize>,
    pub pac: bool,
    pub accuracy: Option<f64>,
    pub iterations: usize,
    pub membership_queries: usize,
    pub secs: f64,
    pub error: Option<String>,
    /// The learned automaton in the DFA file format.
    pub dfa: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompareReport {
    pub config: ExplainConfig,
    pub ltl: LtlSide,
    pub dfa: DfaSide,
    pub eval_suite_size: usize,
    pub eval_suite_hash: String,
    /// Both accuracies were measured on the suite with this hash.
    pub shared_suite: bool,
}

/// Runs the formula loop and L* under the same seed and suite schedule and
/// scores both on one evaluation suite.
pub fn compare(cfg: &ExplainConfig, hooks: &RunHooks) -> Result<CompareReport, ConfigError> {
    let p = Prepared::new(cfg)?;
    Ok(compare_prepared(cfg, &p, hooks))
}

pub fn compare_prepared(cfg: &ExplainConfig, p: &Prepared, hooks: &RunHooks) -> CompareReport {
    let report = explain_prepared(cfg, p, hooks);
    let suite = p.eval_suite(cfg.seed, cfg.eval_size);
    let hash = suite_hash(p.alphabet(), &suite);
    let target = p.target();

    let t0 = Instant::now();
    let budget = LstarBudget { max_iterations: cfg.max_iterations, time: Some(Duration::from_secs_f64(cfg.timeout_secs.max(0.0))) };
    let lstar = lstar_learn(&target, cfg.epsilon, cfg.delta, &p.sampler, &mut stream_rng(cfg.seed, VERIFIER_STREAM), budget);
    let dfa = match lstar {
        Ok(r) => DfaSide {
            states: Some(r.dfa.state_count()),
            pac: r.pac,
            accuracy: accuracy(&r.dfa, &target, &suite).ok(),
            iterations: r.iterations.len(),
            membership_queries: r.membership_queries,
            secs: t0.elapsed().as_secs_f64(),
            error: None,
            dfa: serde_json::from_str(&r.dfa.to_json()).ok(),
        },
        Err(e) => DfaSide {
            states: None,
            pac: false,
            accuracy: None,
            iterations: 0,
            membership_queries: 0,
            secs: t0.elapsed().as_secs_f64(),
            error: Some(e.to_string()),
            dfa: None,
        },
    };
    CompareReport {
        config: cfg.clone(),
        ltl: LtlSide {
            size: report.outcome.size(),
            accuracy: report.accuracy,
            iterations: report.iterations.len(),
            secs: report.timings.total_secs,
            outcome: report.outcome,
        },
        dfa,
        eval_suite_size: suite.len(),
        shared_suite: report.eval_suite_hash == hash,
        eval_suite_hash: hash,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mismatch {
    pub word: String,
    pub expected: u8,
    pub predicted: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub formula: String,
    pub acceptor: String,
    pub query: String,
    pub dist: String,
    pub seed: u64,
    pub test_size: usize,
    pub accuracy: f64,
    pub eval_suite_hash: String,
    pub mismatches: Vec<Mismatch>,
}

/// Scores a given formula on a fresh evaluation suite.
pub fn eval(formula: &str, cfg: &ExplainConfig) -> Result<EvalReport, ConfigError> {
    if cfg.eval_size == 0 {
        return Err(ConfigError::Other("test size must be at least 1".into()));
    }
    let p = Prepared::new(cfg)?;
    let phi = parse_ltl(formula, p.alphabet()).map_err(|e| ConfigError::Formula(e.to_string()))?;
    let compiled = CompiledFormula::new(&phi);
    let target = p.target();
    let suite = p.eval_suite(cfg.seed, cfg.eval_size);
    let labels = target.labels(&suite).map_err(|e: VerifyError| ConfigError::Other(e.to_string()))?;
    let mut mismatches = Vec::new();
    for (w, expected) in suite.iter().zip(&labels) {
        let predicted = compiled.satisfies(w);
        if predicted != *expected {
            mismatches.push(Mismatch {
                word: p.alphabet().render_word(w),
                expected: u8::from(*expected),
                predicted: u8::from(predicted),
            });
        }
    }
    Ok(EvalReport {
        formula: phi.to_text(p.alphabet()),
        acceptor: cfg.acceptor.clone(),
        query: cfg.query.clone(),
        dist: cfg.dist.clone(),
        seed: cfg.seed,
        test_size: suite.len(),
        accuracy: 1.0 - mismatches.len() as f64 / suite.len() as f64,
        eval_suite_hash: suite_hash(p.alphabet(), &suite),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::satisfies;

    fn equivalent_up_to(a: &Formula, b: &Formula, alphabet: &Alphabet, n: usize) -> bool {
        alphabet.words_up_to(n).all(|w| satisfies(a, &w) == satisfies(b, &w))
    }

    #[test]
    fn explains_finally_a() {
        let cfg = ExplainConfig { seed: 1, ..ExplainConfig::new("ltl:F(a)", "true") };
        let report = explain(&cfg, &RunHooks::default()).unwrap();
        assert_eq!(report.outcome.kind(), "PacPass", "{:?}", report.outcome);
        let ab = crate::acceptor::default_alphabet();
        let phi = report.formula(&ab).unwrap();
        assert_eq!(phi.size(), 2);
        assert!(equivalent_up_to(&phi, &parse_ltl("F(a)", &ab).unwrap(), &ab, 6));
        assert_eq!(report.accuracy, Some(1.0));
        for (n, it) in report.iterations.iter().enumerate() {
            assert_eq!(it.index, n + 1);
            assert_eq!(it.r_i, crate::verifier::suite_size(n + 1, 0.05, 0.05));
        }
        assert_eq!(report.iterations.last().unwrap().mismatches, 0);
    }

    #[test]
    fn replay_is_identical() {
        let cfg = ExplainConfig { seed: 4, ..ExplainConfig::new("ltl:F(a)", "F(b)") };
        let a = explain(&cfg, &RunHooks::default()).unwrap();
        let b = explain(&cfg, &RunHooks::default()).unwrap();
        let trace = |r: &ExplanationReport| {
            r.iterations
                .iter()
                .map(|i| (i.conjecture.clone(), i.r_i, i.counterexamples.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(trace(&a), trace(&b));
        assert_eq!(a.eval_suite_hash, b.eval_suite_hash);
    }

    #[test]
    fn iteration_limit_gives_early_stop() {
        let cfg = ExplainConfig { seed: 2, max_iterations: 1, ..ExplainConfig::new("ltl:F(a & X b)", "true") };
        let report = explain(&cfg, &RunHooks::default()).unwrap();
        match &report.outcome {
            Outcome::EarlyStop { r_i, k, formula, .. } => {
                assert_eq!(*r_i, 74);
                assert!(*k >= 1);
                assert_eq!(formula, "true");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counterexample_log_lines() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("ce.jsonl");
        let cfg = ExplainConfig { seed: 3, ..ExplainConfig::new("ltl:F(a)", "true") };
        let report = explain(&cfg, &RunHooks { counterexample_log: Some(log.clone()) }).unwrap();
        let total: usize = report.iterations.iter().map(|i| i.counterexamples.len()).sum();
        let text = std::fs::read_to_string(&log).unwrap();
        assert_eq!(text.lines().count(), total);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["label"] == 0 || v["label"] == 1);
        }
    }

    #[test]
    fn eval_examples() {
        let cfg = ExplainConfig { eval_size: 500, ..ExplainConfig::new("ltl:F(a)", "true") };
        assert_eq!(eval("F(a)", &cfg).unwrap().accuracy, 1.0);
        let cfg_false = ExplainConfig { eval_size: 500, ..ExplainConfig::new("ltl:F(a)", "false") };
        assert_eq!(eval("false", &cfg_false).unwrap().accuracy, 1.0);
        let r = eval("G(a)", &cfg).unwrap();
        assert!(r.accuracy < 1.0);
        assert_eq!(r.mismatches.len(), ((1.0 - r.accuracy) * 500.0).round() as usize);
    }

    #[test]
    fn compare_shares_suite() {
        let cfg = ExplainConfig { seed: 1, ..ExplainConfig::new("ltl:F(a)", "true") };
        let r = compare(&cfg, &RunHooks::default()).unwrap();
        assert!(r.shared_suite);
        assert_eq!(r.ltl.size, Some(2));
        assert_eq!(r.dfa.states, Some(2));
        assert_eq!(r.ltl.accuracy, Some(1.0));
        assert_eq!(r.dfa.accuracy, Some(1.0));
    }

    #[test]
    fn config_errors() {
        let bad = [
            ExplainConfig::new("ltl:F(a)", "F("),
            ExplainConfig { dist: "poisson".into(), ..ExplainConfig::new("ltl:F(a)", "true") },
            ExplainConfig { epsilon: 1.5, ..ExplainConfig::new("ltl:F(a)", "true") },
            ExplainConfig { ops: "W".into(), ..ExplainConfig::new("ltl:F(a)", "true") },
            ExplainConfig::new("builtin:none", "true"),
        ];
        for cfg in bad {
            assert!(explain(&cfg, &RunHooks::default()).is_err(), "{cfg:?}");
        }
    }
}
