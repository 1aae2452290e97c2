use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AcceptorError;
use crate::alphabet::{Alphabet, Symbol, Word};

/// Where a run ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunEnd {
    State(usize),
    Sink,
}

/// Partial DFA. Missing transitions lead to an implicit rejecting sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    state_count: usize,
    initial: usize,
    accepting: BTreeSet<usize>,
    /// `delta[state][symbol]`
    delta: Vec<Vec<Option<usize>>>,
}

#[derive(Serialize, Deserialize)]
struct DfaFile {
    alphabet: Vec<String>,
    states: usize,
    initial: usize,
    accepting: Vec<usize>,
    transitions: Vec<(usize, String, usize)>,
}

impl Dfa {
    pub fn new(
        alphabet: Alphabet,
        state_count: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = (usize, Symbol, usize)>,
    ) -> Result<Self, AcceptorError> {
        let bad = |m: String| Err(AcceptorError::Schema(m));
        if state_count == 0 {
            return bad("a DFA needs at least one state".into());
        }
        if initial >= state_count {
            return bad(format!("initial state {initial} out of range"));
        }
        let accepting: BTreeSet<usize> = accepting.into_iter().collect();
        if let Some(&q) = accepting.iter().find(|&&q| q >= state_count) {
            return bad(format!("accepting state {q} out of range"));
        }
        let mut delta = vec![vec![None; alphabet.len()]; state_count];
        for (from, sym, to) in transitions {
            if from >= state_count || to >= state_count {
                return bad(format!("transition {from} -> {to} out of range"));
            }
            if !alphabet.contains(sym) {
                return bad(format!("transition symbol #{} not in alphabet", sym.0));
            }
            let slot = &mut delta[from][sym.index()];
            if slot.is_some_and(|old| old != to) {
                return bad(format!("state {from} has two transitions on `{}`", alphabet.name(sym)));
            }
            *slot = Some(to);
        }
        Ok(Dfa { alphabet, state_count, initial, accepting, delta })
    }

    /// Builds a total DFA from a table `delta[state][symbol]`.
    pub fn from_table(
        alphabet: Alphabet,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        table: Vec<Vec<usize>>,
    ) -> Result<Self, AcceptorError> {
        let transitions: Vec<(usize, Symbol, usize)> = table
            .iter()
            .enumerate()
            .flat_map(|(q, row)| row.iter().enumerate().map(move |(a, &to)| (q, Symbol(a as u32), to)))
            .collect();
        Dfa::new(alphabet, table.len(), initial, accepting, transitions)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting.contains(&q)
    }

    pub fn step(&self, q: usize, sym: Symbol) -> Option<usize> {
        self.delta[q][sym.index()]
    }

    pub fn run(&self, word: &Word) -> RunEnd {
        let mut q = self.initial;
        for sym in word.iter() {
            match self.step(q, sym) {
                Some(next) => q = next,
                None => return RunEnd::Sink,
            }
        }
        RunEnd::State(q)
    }

    pub fn accepts(&self, word: &Word) -> bool {
        matches!(self.run(word), RunEnd::State(q) if self.is_accepting(q))
    }

    pub fn from_json(text: &str) -> Result<Self, AcceptorError> {
        let file: DfaFile = serde_json::from_str(text).map_err(|e| AcceptorError::Schema(e.to_string()))?;
        let alphabet = Alphabet::new(&file.alphabet).map_err(|e| AcceptorError::Schema(e.to_string()))?;
        let mut transitions = Vec::with_capacity(file.transitions.len());
        for (from, name, to) in &file.transitions {
            let sym = alphabet
                .symbol(name)
                .ok_or_else(|| AcceptorError::Schema(format!("transition symbol `{name}` not in alphabet")))?;
            transitions.push((*from, sym, *to));
        }
        Dfa::new(alphabet, file.states, file.initial, file.accepting, transitions)
    }

    pub fn to_json(&self) -> String {
        let mut transitions = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (a, to) in row.iter().enumerate() {
                if let Some(to) = to {
                    transitions.push((q, self.alphabet.names()[a].clone(), *to));
                }
            }
        }
        let file = DfaFile {
            alphabet: self.alphabet.names().to_vec(),
            states: self.state_count,
            initial: self.initial,
            accepting: self.accepting.iter().copied().collect(),
            transitions,
        };
        serde_json::to_string_pretty(&file).expect("DFA serializes")
    }

    pub fn load(path: &Path) -> Result<Self, AcceptorError> {
        let text = std::fs::read_to_string(path).map_err(|e| AcceptorError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), AcceptorError> {
        std::fs::write(path, self.to_json()).map_err(|e| AcceptorError::Io(path.display().to_string(), e))
    }

    /// Minimal complete DFA for the same language, without unreachable states.
    ///
    /// A rejecting sink is kept only when the language needs one.
    pub fn minimize(&self) -> Dfa {
        let k = self.alphabet.len();
        // Complete with an explicit sink at index `state_count`.
        let sink = self.state_count;
        let total = |q: usize, a: usize| -> usize {
            if q == sink {
                sink
            } else {
                self.delta[q][a].unwrap_or(sink)
            }
        };
        let mut reach = vec![self.initial];
        let mut seen = vec![false; self.state_count + 1];
        seen[self.initial] = true;
        let mut i = 0;
        while i < reach.len() {
            let q = reach[i];
            for a in 0..k {
                let to = total(q, a);
                if !seen[to] {
                    seen[to] = true;
                    reach.push(to);
                }
            }
            i += 1;
        }
        // Moore partition refinement over reachable states.
        let accepting = |q: usize| q != sink && self.accepting.contains(&q);
        let mut class: HashMap<usize, usize> = reach.iter().map(|&q| (q, usize::from(accepting(q)))).collect();
        loop {
            let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let mut next: HashMap<usize, usize> = HashMap::new();
            for &q in &reach {
                let sig = (class[&q], (0..k).map(|a| class[&total(q, a)]).collect::<Vec<_>>());
                let fresh = ids.len();
                next.insert(q, *ids.entry(sig).or_insert(fresh));
            }
            let stable = ids.len() == class.values().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        // Renumber in BFS order from the initial state.
        let mut order: HashMap<usize, usize> = HashMap::new();
        let mut reps: Vec<usize> = Vec::new();
        for &q in &reach {
            let c = class[&q];
            if let std::collections::hash_map::Entry::Vacant(e) = order.entry(c) {
                e.insert(reps.len());
                reps.push(q);
            }
        }
        let table: Vec<Vec<usize>> = reps
            .iter()
            .map(|&q| (0..k).map(|a| order[&class[&total(q, a)]]).collect())
            .collect();
        let acc: Vec<usize> = reps.iter().enumerate().filter(|(_, &q)| accepting(q)).map(|(i, _)| i).collect();
        Dfa::from_table(self.alphabet.clone(), 0, acc, table).expect("minimized DFA is well formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let dfa = super::super::builtin::alternating_bit();
        let back = Dfa::from_json(&dfa.to_json()).unwrap();
        assert_eq!(back, dfa);
    }

    #[test]
    fn schema_errors() {
        let bad = [
            r#"{"alphabet":["a"],"states":1,"initial":1,"accepting":[],"transitions":[]}"#,
            r#"{"alphabet":["a"],"states":1,"initial":0,"accepting":[3],"transitions":[]}"#,
            r#"{"alphabet":["a"],"states":1,"initial":0,"accepting":[],"transitions":[[0,"b",0]]}"#,
            r#"{"alphabet":["a"],"states":2,"initial":0,"accepting":[],"transitions":[[0,"a",0],[0,"a",1]]}"#,
            r#"{"alphabet":["a"],"states":1}"#,
        ];
        for text in bad {
            assert!(matches!(Dfa::from_json(text), Err(AcceptorError::Schema(_))), "{text}");
        }
    }

    #[test]
    fn minimize_merges_equivalent_states() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        // Three states, two of them accepting and equivalent: F(a).
        let dfa = Dfa::from_table(ab.clone(), 0, [1, 2], vec![vec![1, 0], vec![2, 2], vec![1, 1]]).unwrap();
        let min = dfa.minimize();
        assert_eq!(min.state_count(), 2);
        for w in ab.words_up_to(6) {
            assert_eq!(min.accepts(&w), dfa.accepts(&w));
        }
        let partial = super::super::builtin::alternating_bit();
        assert_eq!(partial.minimize().state_count(), 5);
    }
}
