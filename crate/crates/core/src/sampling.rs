//! Seeded random words.
//!
//! Generator: ChaCha8 (`rand_chacha`), seeded with `seed_from_u64(seed)` and
//! split into independent streams with `set_stream`. Stream 0 drives the
//! verifier and equivalence queries, stream 1 draws evaluation suites.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{Alphabet, Symbol, Word};

pub const VERIFIER_STREAM: u64 = 0;
pub const EVAL_STREAM: u64 = 1;

pub const DEFAULT_DIST: &str = "uniform:maxlen=30";

#[derive(Debug, Error, PartialEq)]
pub enum DistError {
    #[error("bad distribution `{0}`: expected uniform:maxlen=N or geometric:p=F, optionally followed by ,weights=w1;w2;...")]
    Syntax(String),
    #[error("geometric stop probability must lie in (0, 1], got {0}")]
    StopProbability(f64),
    #[error("symbol weights must be positive and finite")]
    Weights,
    #[error("{given} symbol weights for an alphabet of {expected}")]
    WeightCount { given: usize, expected: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LengthLaw {
    /// Length uniform on `0..=max_len`.
    Uniform { max_len: usize },
    /// `P(len = k) = p (1 - p)^k`.
    Geometric { stop: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub length: LengthLaw,
    /// Relative symbol weights in alphabet order; uniform when absent.
    pub weights: Option<Vec<f64>>,
}

impl Default for DistributionSpec {
    fn default() -> Self {
        DistributionSpec { length: LengthLaw::Uniform { max_len: 30 }, weights: None }
    }
}

impl DistributionSpec {
    pub fn uniform(max_len: usize) -> Self {
        DistributionSpec { length: LengthLaw::Uniform { max_len }, weights: None }
    }

    pub fn geometric(stop: f64) -> Result<Self, DistError> {
        if !(stop > 0.0 && stop <= 1.0) {
            return Err(DistError::StopProbability(stop));
        }
        Ok(DistributionSpec { length: LengthLaw::Geometric { stop }, weights: None })
    }

    pub fn mean_length(&self) -> f64 {
        match self.length {
            LengthLaw::Uniform { max_len } => max_len as f64 / 2.0,
            LengthLaw::Geometric { stop } => (1.0 - stop) / stop,
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = DistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || DistError::Syntax(s.to_string());
        let mut parts = s.trim().split(',');
        let head = parts.next().ok_or_else(syntax)?;
        let (kind, param) = head.split_once(':').ok_or_else(syntax)?;
        let (key, value) = param.split_once('=').ok_or_else(syntax)?;
        let mut spec = match (kind.trim(), key.trim()) {
            ("uniform", "maxlen") => DistributionSpec::uniform(value.trim().parse().map_err(|_| syntax())?),
            ("geometric", "p") => DistributionSpec::geometric(value.trim().parse().map_err(|_| syntax())?)?,
            _ => return Err(syntax()),
        };
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(syntax)?;
            if key.trim() != "weights" || spec.weights.is_some() {
                return Err(syntax());
            }
            let weights: Vec<f64> = value
                .split(';')
                .map(|w| w.trim().parse::<f64>().map_err(|_| syntax()))
                .collect::<Result<_, _>>()?;
            if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(DistError::Weights);
            }
            spec.weights = Some(weights);
        }
        Ok(spec)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.length {
            LengthLaw::Uniform { max_len } => write!(f, "uniform:maxlen={max_len}")?,
            LengthLaw::Geometric { stop } => write!(f, "geometric:p={stop}")?,
        }
        if let Some(w) = &self.weights {
            let joined: Vec<String> = w.iter().map(f64::to_string).collect();
            write!(f, ",weights={}", joined.join(";"))?;
        }
        Ok(())
    }
}

/// ChaCha8 generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws words from a distribution over one alphabet.
#[derive(Clone, Debug)]
pub struct WordSampler {
    spec: DistributionSpec,
    symbols: WeightedIndex<f64>,
}

impl WordSampler {
    pub fn new(spec: DistributionSpec, alphabet: &Alphabet) -> Result<Self, DistError> {
        let weights = match &spec.weights {
            Some(w) if w.len() != alphabet.len() => {
                return Err(DistError::WeightCount { given: w.len(), expected: alphabet.len() })
            }
            Some(w) => w.clone(),
            None => vec![1.0; alphabet.len()],
        };
        let symbols = WeightedIndex::new(weights).map_err(|_| DistError::Weights)?;
        Ok(WordSampler { spec, symbols })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn sample_word<R: Rng + ?Sized>(&self, rng: &mut R) -> Word {
        let len = match self.spec.length {
            LengthLaw::Uniform { max_len } => rng.gen_range(0..=max_len),
            LengthLaw::Geometric { stop } => {
                let mut k = 0;
                while rng.gen::<f64>() >= stop {
                    k += 1;
                }
                k
            }
        };
        Word::new((0..len).map(|_| Symbol(self.symbols.sample(rng) as u32)).collect())
    }

    /// `count` independent draws; duplicates are kept.
    pub fn sample_suite<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Word> {
        (0..count).map(|_| self.sample_word(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        Alphabet::new(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let d: DistributionSpec = "uniform:maxlen=30".parse().unwrap();
        assert_eq!(d, DistributionSpec::default());
        let g: DistributionSpec = "geometric:p=0.25,weights=1;2;3".parse().unwrap();
        assert_eq!(g.length, LengthLaw::Geometric { stop: 0.25 });
        assert_eq!(g.weights, Some(vec![1.0, 2.0, 3.0]));
        assert_eq!(g.to_string().parse::<DistributionSpec>().unwrap(), g);
        assert!("uniform:len=3".parse::<DistributionSpec>().is_err());
        assert_eq!("geometric:p=0".parse::<DistributionSpec>(), Err(DistError::StopProbability(0.0)));
        assert_eq!("uniform:maxlen=3,weights=1;-1".parse::<DistributionSpec>(), Err(DistError::Weights));
        let two: DistributionSpec = "uniform:maxlen=3,weights=1;1".parse().unwrap();
        assert!(WordSampler::new(two, &abc()).is_err());
    }

    #[test]
    fn zero_max_len_gives_empty_words() {
        let s = WordSampler::new(DistributionSpec::uniform(0), &abc()).unwrap();
        let mut rng = stream_rng(1, 0);
        assert!(s.sample_suite(50, &mut rng).iter().all(Word::is_empty));
        assert!(s.sample_suite(0, &mut rng).is_empty());
    }

    #[test]
    fn suites_are_reproducible() {
        let s = WordSampler::new(DistributionSpec::default(), &abc()).unwrap();
        let a = s.sample_suite(74, &mut stream_rng(9, 0));
        let b = s.sample_suite(74, &mut stream_rng(9, 0));
        let c = s.sample_suite(74, &mut stream_rng(9, 1));
        assert_eq!(a.len(), 74);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_mean_length() {
        let s = WordSampler::new(DistributionSpec::uniform(4), &abc()).unwrap();
        let mut rng = stream_rng(42, 0);
        let n = 100_000;
        let total: usize = (0..n).map(|_| s.sample_word(&mut rng).len()).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 2.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn geometric_empty_probability() {
        let s = WordSampler::new(DistributionSpec::geometric(0.5).unwrap(), &abc()).unwrap();
        let mut rng = stream_rng(7, 0);
        let n = 100_000;
        let empty = (0..n).filter(|_| s.sample_word(&mut rng).is_empty()).count();
        let p = empty as f64 / n as f64;
        assert!((p - 0.5).abs() < 0.01, "P(len=0) = {p}");
    }
}
