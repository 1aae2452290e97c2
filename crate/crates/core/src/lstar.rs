//! Angluin-style DFA extraction with sampled equivalence queries.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;

use crate::acceptor::Dfa;
use crate::alphabet::{Alphabet, Word};
use crate::sampling::WordSampler;
use crate::verifier::{suite_size, verify_suite, BatchMode, Target, VerifyError};

/// Prefix/suffix membership table.
pub struct ObservationTable<'t, 'a> {
    target: &'t Target<'a>,
    alphabet: Alphabet,
    prefixes: Vec<Word>,
    prefix_set: BTreeSet<Word>,
    suffixes: Vec<Word>,
    cache: HashMap<Word, bool>,
    queries: usize,
}

impl<'t, 'a> ObservationTable<'t, 'a> {
    pub fn new(target: &'t Target<'a>) -> Result<Self, VerifyError> {
        let alphabet = target.acceptor().alphabet().clone();
        let mut table = ObservationTable {
            target,
            alphabet,
            prefixes: Vec::new(),
            prefix_set: BTreeSet::new(),
            suffixes: vec![Word::empty()],
            cache: HashMap::new(),
            queries: 0,
        };
        table.add_prefix(Word::empty());
        table.fill()?;
        Ok(table)
    }

    pub fn prefixes(&self) -> &[Word] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[Word] {
        &self.suffixes
    }

    /// Distinct membership queries asked so far.
    pub fn membership_queries(&self) -> usize {
        self.queries
    }

    /// Recorded membership answer, if the word has been asked.
    pub fn recorded(&self, word: &Word) -> Option<bool> {
        self.cache.get(word).copied()
    }

    pub fn recorded_entries(&self) -> impl Iterator<Item = (&Word, bool)> {
        self.cache.iter().map(|(w, l)| (w, *l))
    }

    fn add_prefix(&mut self, word: Word) -> bool {
        if self.prefix_set.insert(word.clone()) {
            self.prefixes.push(word);
            true
        } else {
            false
        }
    }

    fn extensions(&self) -> impl Iterator<Item = Word> + '_ {
        self.prefixes
            .iter()
            .flat_map(|s| self.alphabet.symbols().map(move |a| s.push(a)))
    }

    /// Asks every missing entry of `(S ∪ S·Σ) · E`.
    fn fill(&mut self) -> Result<(), VerifyError> {
        let mut missing: Vec<Word> = Vec::new();
        let mut pending: BTreeSet<Word> = BTreeSet::new();
        let rows: Vec<Word> = self.prefixes.iter().cloned().chain(self.extensions()).collect();
        for s in &rows {
            for e in &self.suffixes {
                let w = s.concat(e);
                if !self.cache.contains_key(&w) && pending.insert(w.clone()) {
                    missing.push(w);
                }
            }
        }
        let labels = self.target.labels(&missing)?;
        self.queries += missing.len();
        self.cache.extend(missing.into_iter().zip(labels));
        Ok(())
    }

    pub fn row(&self, s: &Word) -> Vec<bool> {
        self.suffixes.iter().map(|e| self.cache[&s.concat(e)]).collect()
    }

    /// An extension whose row matches no prefix row.
    fn unclosed(&self) -> Option<Word> {
        let rows: BTreeSet<Vec<bool>> = self.prefixes.iter().map(|s| self.row(s)).collect();
        self.extensions().find(|t| !rows.contains(&self.row(t)))
    }

    /// A distinguishing suffix `a·e` for two prefixes with equal rows.
    fn inconsistency(&self) -> Option<Word> {
        for (i, s1) in self.prefixes.iter().enumerate() {
            for s2 in &self.prefixes[i + 1..] {
                if self.row(s1) != self.row(s2) {
                    continue;
                }
                for a in self.alphabet.symbols() {
                    let (r1, r2) = (self.row(&s1.push(a)), self.row(&s2.push(a)));
                    if let Some(j) = (0..r1.len()).find(|&j| r1[j] != r2[j]) {
                        return Some(Word::new(vec![a]).concat(&self.suffixes[j]));
                    }
                }
            }
        }
        None
    }

    /// Closes and makes the table consistent.
    pub fn stabilize(&mut self) -> Result<(), VerifyError> {
        loop {
            if let Some(t) = self.unclosed() {
                self.add_prefix(t);
                self.fill()?;
            } else if let Some(e) = self.inconsistency() {
                self.suffixes.push(e);
                self.fill()?;
            } else {
                return Ok(());
            }
        }
    }

    /// Adds every prefix of a counterexample; returns how many were new.
    pub fn add_counterexample(&mut self, word: &Word) -> Result<usize, VerifyError> {
        let added = word.prefixes().filter(|p| self.add_prefix(p.clone())).count();
        self.fill()?;
        Ok(added)
    }

    pub fn distinct_rows(&self) -> usize {
        self.prefixes.iter().map(|s| self.row(s)).collect::<BTreeSet<_>>().len()
    }

    /// Hypothesis DFA of a closed and consistent table.
    pub fn hypothesis(&self) -> Dfa {
        let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut reps: Vec<&Word> = Vec::new();
        for s in &self.prefixes {
            let fresh = index.len();
            if *index.entry(self.row(s)).or_insert(fresh) == fresh {
                reps.push(s);
            }
        }
        let table: Vec<Vec<usize>> = reps
            .iter()
            .map(|s| {
                self.alphabet
                    .symbols()
                    .map(|a| index[&self.row(&s.push(a))])
                    .collect()
            })
            .collect();
        // The empty suffix comes first, so column 0 is membership of the prefix itself.
        let accepting: Vec<usize> = reps.iter().enumerate().filter(|(_, s)| self.cache[**s]).map(|(q, _)| q).collect();
        Dfa::from_table(self.alphabet.clone(), index[&self.row(&Word::empty())], accepting, table)
            .expect("hypothesis is well formed")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LstarBudget {
    pub max_iterations: usize,
    pub time: Option<Duration>,
}

impl Default for LstarBudget {
    fn default() -> Self {
        LstarBudget { max_iterations: 30, time: Some(Duration::from_secs(400)) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LstarIteration {
    pub index: usize,
    pub states: usize,
    pub suite_size: usize,
    pub mismatches: usize,
    pub counterexample: Option<String>,
    pub secs: f64,
}

#[derive(Clone, Debug)]
pub struct LstarResult {
    pub dfa: Dfa,
    /// The last hypothesis passed its equivalence suite.
    pub pac: bool,
    pub iterations: Vec<LstarIteration>,
    pub membership_queries: usize,
    pub secs: f64,
}

/// Learns a DFA for the target, answering equivalence queries with the
/// verifier's growing random suites.
pub fn lstar_learn<R: Rng + ?Sized>(
    target: &Target,
    epsilon: f64,
    delta: f64,
    sampler: &WordSampler,
    rng: &mut R,
    budget: LstarBudget,
) -> Result<LstarResult, VerifyError> {
    let started = Instant::now();
    let deadline = budget.time.map(|t| started + t);
    let mut table = ObservationTable::new(target)?;
    let mut iterations = Vec::new();
    let mut pac = false;
    let mut dfa;
    let mut i = 1;
    loop {
        let t0 = Instant::now();
        table.stabilize()?;
        dfa = table.hypothesis();
        let suite = sampler.sample_suite(suite_size(i, epsilon, delta), rng);
        let outcome = verify_suite(&dfa, target, &suite, BatchMode::FirstFailure)?;
        let ce = outcome.counterexamples.first().map(|c| c.word.clone());
        iterations.push(LstarIteration {
            index: i,
            states: dfa.state_count(),
            suite_size: outcome.suite_size,
            mismatches: outcome.mismatches,
            counterexample: ce.as_ref().map(|w| target.acceptor().alphabet().render_word(w)),
            secs: t0.elapsed().as_secs_f64(),
        });
        let Some(ce) = ce else {
            pac = true;
            break;
        };
        if i >= budget.max_iterations || deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        table.add_counterexample(&ce)?;
        i += 1;
    }
    Ok(LstarResult {
        dfa,
        pac,
        iterations,
        membership_queries: table.membership_queries(),
        secs: started.elapsed().as_secs_f64(),
    })
}

pub fn dfa_size(dfa: &Dfa) -> usize {
    dfa.state_count()
}

pub fn dfa_accuracy(dfa: &Dfa, target: &Target, suite: &[Word]) -> Result<f64, VerifyError> {
    crate::verifier::accuracy(dfa, target, suite)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::acceptor::{builtin, load_acceptor, Acceptor};
    use crate::ltl::{parse_ltl, Formula};
    use crate::sampling::{stream_rng, DistributionSpec};

    fn learn(acceptor: &Acceptor, query: &Formula) -> LstarResult {
        let target = Target::new(acceptor, query);
        let sampler = WordSampler::new(DistributionSpec::default(), acceptor.alphabet()).unwrap();
        lstar_learn(&target, 0.05, 0.05, &sampler, &mut stream_rng(5, 0), LstarBudget::default()).unwrap()
    }

    #[test]
    fn membership_examples() {
        let a = load_acceptor("ltl:F(a)", None).unwrap();
        let q = parse_ltl("F(b)", a.alphabet()).unwrap();
        let t = Target::new(&a, &q);
        let w = |s: &str| a.alphabet().parse_word(s).unwrap();
        assert!(t.label(&w("ab")).unwrap());
        assert!(!t.label(&w("aa")).unwrap());
        assert!(!t.label(&Word::empty()).unwrap());
    }

    #[test]
    fn finally_a_has_two_states() {
        let a = load_acceptor("ltl:F(a)", None).unwrap();
        let r = learn(&a, &Formula::True);
        assert!(r.pac);
        assert_eq!(dfa_size(&r.dfa), 2);
    }

    #[test]
    fn false_query_gives_one_state() {
        let a = load_acceptor("ltl:F(a)", None).unwrap();
        let r = learn(&a, &Formula::False);
        assert_eq!(dfa_size(&r.dfa), 1);
        assert!(!r.dfa.accepts(&Word::empty()));
    }

    #[test]
    fn hypothesis_agrees_with_recorded_answers() {
        let a = load_acceptor("ltl:G(a -> X b)", None).unwrap();
        let target = Target::new(&a, &Formula::True);
        let mut table = ObservationTable::new(&target).unwrap();
        table.stabilize().unwrap();
        let ce = a.alphabet().parse_word("a b a c").unwrap();
        let before = table.distinct_rows();
        table.add_counterexample(&ce).unwrap();
        table.stabilize().unwrap();
        assert!(table.distinct_rows() > before || table.hypothesis().accepts(&ce) == target.label(&ce).unwrap());
        let dfa = table.hypothesis();
        for s in table.prefixes() {
            for e in table.suffixes() {
                let w = s.concat(e);
                assert_eq!(dfa.accepts(&w), table.recorded(&w).unwrap());
            }
        }
    }

    #[test]
    fn accuracy_helpers() {
        let alt = Acceptor::from_dfa(builtin::alternating_bit());
        let t = Target::new(&alt, &Formula::True);
        let suite: Vec<Word> = alt.alphabet().words_up_to(4).collect();
        assert_eq!(dfa_accuracy(&builtin::alternating_bit(), &t, &suite).unwrap(), 1.0);
        assert_eq!(dfa_size(&builtin::alternating_bit()), 4);
        let ab = crate::acceptor::default_alphabet();
        let top = Dfa::from_table(ab.clone(), 0, [0], vec![vec![0; 3]]).unwrap();
        let oracle = Acceptor::from_formula(parse_ltl("a | !a", &ab).unwrap(), ab.clone());
        let t = Target::new(&oracle, &Formula::True);
        let suite: Vec<Word> = ab.words_up_to(3).collect();
        assert_eq!(dfa_accuracy(&top, &t, &suite).unwrap(), 1.0);
    }
}
