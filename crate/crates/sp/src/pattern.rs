//! Symbols and patterns: the system's sole knowledge structure.
//!
//! A pattern is an ordered sequence of atomic symbol tokens. The first
//! `id_prefix_len` symbols are *identification* symbols (they name the
//! pattern: a class token plus discriminants); the rest are *contents*
//! symbols. Matching treats all symbols alike; only scoring distinguishes
//! the two classes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An atomic symbol token. Matching is exact token equality.
pub type Token = String;

/// Whether a symbol names its pattern or belongs to its body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolClass {
    Identification,
    Contents,
}

/// One symbol instance viewed inside its owning pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symbol<'a> {
    pub token: &'a str,
    pub class: SymbolClass,
}

/// Whether a pattern is incoming information or stored knowledge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    New,
    Old,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    User,
    Learned,
}

/// An ordered sequence of symbols with a frequency and an identification
/// prefix. Immutable after construction; share via `Arc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub pattern_id: String,
    pub tokens: Vec<Token>,
    pub id_prefix_len: usize,
    pub frequency: u32,
    pub role: Role,
    pub provenance: Provenance,
}

/// Checks the lexical rules for a single token.
pub fn validate_token(tok: &str) -> Result<()> {
    if tok.is_empty() {
        return Err(Error::Invalid("empty token".into()));
    }
    if tok == ":" {
        return Err(Error::Invalid("`:` is reserved as the prefix delimiter".into()));
    }
    if tok.chars().any(|c| c.is_whitespace()) || tok.contains(';') {
        return Err(Error::Invalid(format!("token `{tok}` contains whitespace or `;`")));
    }
    Ok(())
}

impl Pattern {
    pub fn new(
        pattern_id: impl Into<String>,
        tokens: Vec<Token>,
        id_prefix_len: usize,
        frequency: u32,
        role: Role,
        provenance: Provenance,
    ) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Invalid("pattern must contain at least one symbol".into()));
        }
        if id_prefix_len >= tokens.len() {
            return Err(Error::Invalid(format!(
                "identification prefix ({id_prefix_len}) must be shorter than the pattern ({})",
                tokens.len()
            )));
        }
        if frequency == 0 {
            return Err(Error::Invalid("frequency must be at least 1".into()));
        }
        if role == Role::New && id_prefix_len != 0 {
            return Err(Error::Invalid("New patterns carry no identification prefix".into()));
        }
        for t in &tokens {
            validate_token(t)?;
        }
        Ok(Pattern {
            pattern_id: pattern_id.into(),
            tokens,
            id_prefix_len,
            frequency,
            role,
            provenance,
        })
    }

    /// Convenience constructor for a New pattern over whitespace-split text.
    pub fn new_from_text(pattern_id: impl Into<String>, text: &str) -> Result<Self> {
        let tokens: Vec<Token> = text.split_whitespace().map(str::to_owned).collect();
        Pattern::new(pattern_id, tokens, 0, 1, Role::New, Provenance::User)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn class_of(&self, pos: usize) -> SymbolClass {
        if pos < self.id_prefix_len {
            SymbolClass::Identification
        } else {
            SymbolClass::Contents
        }
    }

    pub fn symbol(&self, pos: usize) -> Symbol<'_> {
        Symbol { token: &self.tokens[pos], class: self.class_of(pos) }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol<'_>> {
        (0..self.tokens.len()).map(move |p| self.symbol(p))
    }

    /// The class token (first identification symbol), if the pattern has one.
    pub fn class_token(&self) -> Option<&str> {
        if self.id_prefix_len > 0 {
            Some(&self.tokens[0])
        } else {
            None
        }
    }

    /// Equality key for unification: token list plus prefix length.
    pub fn unification_key(&self) -> (Vec<Token>, usize) {
        (self.tokens.clone(), self.id_prefix_len)
    }

    pub fn shared(self) -> Arc<Pattern> {
        Arc::new(self)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.frequency != 1 {
            write!(f, "({}) ", self.frequency)?;
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if i == self.id_prefix_len && self.id_prefix_len > 0 {
                write!(f, ": ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Parses one non-comment, non-blank line of the grammar/corpus format.
///
/// Format: optional `(<freq>)` prefix, whitespace-separated symbols, and an
/// optional single `:` splitting the identification prefix from the contents.
/// New-role lines admit neither the frequency prefix delimiter `:` nor a
/// frequency other than the implicit 1.
pub fn parse_pattern_line(line: &str, default_role: Role, pattern_id: &str) -> Result<Pattern> {
    let line = line.trim();
    if line.is_empty() {
        return Err(Error::Invalid("blank line".into()));
    }
    let mut rest = line;
    let mut frequency = 1u32;
    if let Some(stripped) = rest.strip_prefix('(') {
        let close = stripped
            .find(')')
            .ok_or_else(|| Error::Invalid("unterminated `(freq)` prefix".into()))?;
        let num = &stripped[..close];
        frequency = num
            .trim()
            .parse::<u32>()
            .map_err(|_| Error::Invalid(format!("malformed frequency `({num})`")))?;
        if frequency == 0 {
            return Err(Error::Invalid("frequency must be at least 1".into()));
        }
        rest = &stripped[close + 1..];
    }

    let raw: Vec<&str> = rest.split_whitespace().collect();
    let mut tokens: Vec<Token> = Vec::with_capacity(raw.len());
    let mut prefix_len: Option<usize> = None;
    for w in &raw {
        if *w == ":" {
            if prefix_len.is_some() {
                return Err(Error::Invalid("more than one `:` delimiter".into()));
            }
            prefix_len = Some(tokens.len());
        } else {
            validate_token(w)?;
            tokens.push((*w).to_owned());
        }
    }
    if tokens.is_empty() {
        return Err(Error::Invalid("no symbols on line".into()));
    }
    if default_role == Role::New {
        if prefix_len.is_some() {
            return Err(Error::Invalid("`:` is not allowed in a New pattern line".into()));
        }
        if frequency != 1 && line.starts_with('(') {
            // corpus members always carry frequency 1; the prefix is a format error
            return Err(Error::Invalid("`(freq)` is not allowed in a New pattern line".into()));
        }
    }
    let k = prefix_len.unwrap_or(0);
    Pattern::new(pattern_id, tokens, k, frequency, default_role, Provenance::User)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_old_pattern_with_prefix_and_frequency() {
        let p = parse_pattern_line("(1) D 8 : t h e #D", Role::Old, "g0").unwrap();
        assert_eq!(p.tokens, vec!["D", "8", "t", "h", "e", "#D"]);
        assert_eq!(p.id_prefix_len, 2);
        assert_eq!(p.frequency, 1);
        assert_eq!(p.role, Role::Old);
    }

    #[test]
    fn parses_bare_new_line_with_defaults() {
        let p = parse_pattern_line("t h e", Role::New, "n0").unwrap();
        assert_eq!(p.tokens, vec!["t", "h", "e"]);
        assert_eq!(p.id_prefix_len, 0);
        assert_eq!(p.frequency, 1);
    }

    #[test]
    fn parses_frequency_three() {
        let p = parse_pattern_line("(3) N 5 : b r a v e #N", Role::Old, "g1").unwrap();
        assert_eq!(p.id_prefix_len, 2);
        assert_eq!(p.frequency, 3);
        assert_eq!(p.tokens.len(), 8);
    }

    #[test]
    fn rejects_malformed_frequency() {
        assert!(parse_pattern_line("(x) a b", Role::Old, "g").is_err());
        assert!(parse_pattern_line("(0) a b", Role::Old, "g").is_err());
    }

    #[test]
    fn rejects_prefix_delimiter_in_new_line() {
        assert!(parse_pattern_line("D : t h e", Role::New, "n").is_err());
    }

    #[test]
    fn rejects_empty_symbol_list() {
        assert!(parse_pattern_line("(2)", Role::Old, "g").is_err());
    }

    #[test]
    fn rejects_double_delimiter_and_reserved_token() {
        assert!(parse_pattern_line("a : b : c", Role::Old, "g").is_err());
        assert!(validate_token(":").is_err());
        assert!(validate_token("a;b").is_err());
        assert!(validate_token("").is_err());
    }

    #[test]
    fn symbol_classes_follow_prefix() {
        let p = parse_pattern_line("NP 2 : N #N #NP", Role::Old, "g").unwrap();
        assert_eq!(p.class_of(0), SymbolClass::Identification);
        assert_eq!(p.class_of(1), SymbolClass::Identification);
        assert_eq!(p.class_of(2), SymbolClass::Contents);
        assert_eq!(p.class_token(), Some("NP"));
    }

    #[test]
    fn new_pattern_must_have_empty_prefix() {
        let r = Pattern::new("x", vec!["a".into(), "b".into()], 1, 1, Role::New, Provenance::User);
        assert!(r.is_err());
    }

    #[test]
    fn display_round_trips_through_parser() {
        let p = parse_pattern_line("(4) VP 3 : V #V NP #NP #VP", Role::Old, "g").unwrap();
        let q = parse_pattern_line(&p.to_string(), Role::Old, "g").unwrap();
        assert_eq!(p.unification_key(), q.unification_key());
        assert_eq!(p.frequency, q.frequency);
    }
}
