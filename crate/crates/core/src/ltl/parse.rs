//! Recursive-descent parser for the concrete LTL syntax.
//!
//! ```text
//! formula := implies
//! implies := or ("->" implies)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "X" unary | "F" unary | "G" unary | until
//! until   := primary ("U" unary)?
//! primary := "true" | "false" | IDENT | "(" formula ")"
//! ```

use thiserror::Error;

use super::Formula;
use crate::alphabet::Alphabet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown atom `{token}` at column {column}")]
    UnknownAtom { token: String, column: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Not,
    And,
    Or,
    Arrow,
    Ident(String),
}

struct Lexed {
    tok: Tok,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '!' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Lexed { tok, column });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '-' {
            if chars.get(i + 1) == Some(&'>') {
                out.push(Lexed { tok: Tok::Arrow, column });
                i += 2;
            } else {
                return Err(ParseError::Syntax { column, message: "expected `->`".into() });
            }
        } else if c == '>' {
            return Err(ParseError::Syntax { column, message: "unexpected `>`".into() });
        } else {
            let start = i;
            while i < chars.len()
                && !chars[i].is_whitespace()
                && !matches!(chars[i], '(' | ')' | '!' | '&' | '|' | '-' | '>')
            {
                i += 1;
            }
            out.push(Lexed {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    alphabet: &'a Alphabet,
    end_column: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |l| l.column)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { column: self.column(), message: message.into() })
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek() == Some(&Tok::Not) {
            self.pos += 1;
            return Ok(Formula::not(self.unary()?));
        }
        for (kw, ctor) in [
            ("X", Formula::next as fn(Formula) -> Formula),
            ("F", Formula::finally),
            ("G", Formula::globally),
        ] {
            if self.peek_keyword(kw) {
                self.pos += 1;
                return Ok(ctor(self.unary()?));
            }
        }
        self.until()
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.primary()?;
        if self.peek_keyword("U") {
            self.pos += 1;
            let rhs = self.unary()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let column = self.column();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.implies()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "true" => Ok(Formula::True),
                    "false" => Ok(Formula::False),
                    "X" | "F" | "G" | "U" => Err(ParseError::Syntax {
                        column,
                        message: format!("operator `{name}` where an operand was expected"),
                    }),
                    _ => self
                        .alphabet
                        .symbol(&name)
                        .map(Formula::Atom)
                        .ok_or(ParseError::UnknownAtom { token: name, column }),
                }
            }
            Some(_) => self.error("expected an operand"),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses `text` into a formula whose atoms are symbols of `alphabet`.
pub fn parse_ltl(text: &str, alphabet: &Alphabet) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        alphabet,
        end_column: text.chars().count() + 1,
    };
    let f = p.implies()?;
    if p.pos != p.toks.len() {
        return p.error("trailing input");
    }
    Ok(f)
}
