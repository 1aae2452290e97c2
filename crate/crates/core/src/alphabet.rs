//! Finite alphabets and the words over them.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tokens that the LTL parser reserves; no symbol may use them as its name.
pub const RESERVED_NAMES: &[&str] = &["F", "G", "X", "U", "true", "false", "<eps>"];

/// Characters that act as LTL punctuation and therefore cannot appear in a symbol name.
pub const RESERVED_CHARS: &[char] = &['(', ')', '!', '&', '|', '-', '>', ','];

/// Textual form of the empty word, shared by reports and the subprocess protocol.
pub const EMPTY_WORD: &str = "<eps>";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet must contain at least one symbol")]
    Empty,
    #[error("duplicate symbol `{0}`")]
    Duplicate(String),
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("cannot split `{0}` into symbols; separate them with spaces")]
    Ambiguous(String),
}

/// Index of a symbol inside its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol(pub u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An ordered, non-empty set of distinct symbol names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    lookup: HashMap<String, Symbol>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(AlphabetError::Empty);
        }
        let mut lookup = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if !valid_name(name) {
                return Err(AlphabetError::InvalidName(name.clone()));
            }
            if lookup.insert(name.clone(), Symbol(i as u32)).is_some() {
                return Err(AlphabetError::Duplicate(name.clone()));
            }
        }
        Ok(Alphabet { names, lookup })
    }

    /// Parses a comma-separated list such as `a,b,c`.
    pub fn parse_list(text: &str) -> Result<Self, AlphabetError> {
        Alphabet::new(text.split(',').map(str::trim).filter(|s| !s.is_empty()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len() as u32).map(Symbol)
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, sym: Symbol) -> &str {
        &self.names[sym.index()]
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        sym.index() < self.names.len()
    }

    /// Parses a word. Symbols are separated by whitespace; when every symbol
    /// name is a single character the separators may be omitted (`"aab"`).
    /// The empty string, `<eps>` and `λ` denote the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word, AlphabetError> {
        let text = text.trim();
        if text.is_empty() || text == EMPTY_WORD || text == "λ" {
            return Ok(Word::empty());
        }
        if text.contains(char::is_whitespace) {
            return text
                .split_whitespace()
                .map(|tok| {
                    self.symbol(tok)
                        .ok_or_else(|| AlphabetError::UnknownSymbol(tok.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Word::new);
        }
        if let Some(sym) = self.symbol(text) {
            return Ok(Word::new(vec![sym]));
        }
        if self.names.iter().all(|n| n.chars().count() == 1) {
            return text
                .chars()
                .map(|c| {
                    let s = c.to_string();
                    self.symbol(&s).ok_or(AlphabetError::UnknownSymbol(s))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Word::new);
        }
        Err(AlphabetError::Ambiguous(text.to_string()))
    }

    /// Renders a word as space-separated symbol names, `<eps>` when empty.
    pub fn render_word(&self, word: &Word) -> String {
        if word.is_empty() {
            return EMPTY_WORD.to_string();
        }
        word.iter()
            .map(|s| self.name(s))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// All words of exactly `len` symbols, in lexicographic order of symbol index.
    pub fn words_of_len(&self, len: usize) -> impl Iterator<Item = Word> + '_ {
        let k = self.len() as u64;
        let total = k.checked_pow(len as u32).expect("enumeration too large");
        (0..total).map(move |mut code| {
            let mut syms = vec![Symbol(0); len];
            for slot in syms.iter_mut().rev() {
                *slot = Symbol((code % k) as u32);
                code /= k;
            }
            Word::new(syms)
        })
    }

    /// All words of length at most `max_len`, shortest first.
    pub fn words_up_to(&self, max_len: usize) -> impl Iterator<Item = Word> + '_ {
        (0..=max_len).flat_map(move |len| self.words_of_len(len))
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names.join(","))
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !RESERVED_NAMES.contains(&name)
        && !name
            .chars()
            .any(|c| c.is_whitespace() || RESERVED_CHARS.contains(&c))
}

/// A finite sequence of symbols. Position `t` in the 1-indexed sense is `word[t - 1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.iter().copied()
    }

    /// Symbol at 1-indexed position `t`.
    pub fn at(&self, t: usize) -> Symbol {
        self.0[t - 1]
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, sym: Symbol) -> Word {
        let mut v = self.0.clone();
        v.push(sym);
        Word(v)
    }

    /// Prefixes from the empty word up to and including the word itself.
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.len()).map(|n| Word(self.0[..n].to_vec()))
    }

    pub fn is_over(&self, alphabet: &Alphabet) -> bool {
        self.0.iter().all(|s| alphabet.contains(*s))
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}
