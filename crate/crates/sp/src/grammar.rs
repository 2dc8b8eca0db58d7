//! Grammars (collections of Old patterns) and symbol cost models.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pattern::{Pattern, Token};

/// How per-token bit costs are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    /// Every token costs `ceil(log2 A)` bits, `A` = alphabet size (min 1 bit).
    Uniform,
    /// Token `s` costs `-log2(f(s)/F)` bits, `f` weighted by pattern frequency.
    Frequency,
}

/// Per-token bit costs. Deterministic iteration order (sorted by token).
#[derive(Debug, Clone)]
pub struct CostModel {
    pub kind: CostKind,
    costs: BTreeMap<Token, f64>,
}

impl CostModel {
    pub fn cost(&self, token: &str) -> Result<f64> {
        self.costs
            .get(token)
            .copied()
            .ok_or_else(|| Error::MissingToken(token.to_owned()))
    }

    pub fn alphabet(&self) -> impl Iterator<Item = (&str, f64)> {
        self.costs.iter().map(|(t, c)| (t.as_str(), *c))
    }

    pub fn alphabet_len(&self) -> usize {
        self.costs.len()
    }

    /// Total cost of a token sequence.
    pub fn sequence_cost(&self, tokens: &[Token]) -> Result<f64> {
        let mut total = 0.0;
        for t in tokens {
            total += self.cost(t)?;
        }
        Ok(total)
    }

    /// Builds a model directly from an explicit alphabet (uniform kind).
    pub fn uniform_over<I: IntoIterator<Item = Token>>(alphabet: I) -> Result<CostModel> {
        let set: std::collections::BTreeSet<Token> = alphabet.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let bits = ((set.len() as f64).log2().ceil()).max(1.0);
        Ok(CostModel {
            kind: CostKind::Uniform,
            costs: set.into_iter().map(|t| (t, bits)).collect(),
        })
    }
}

/// Builds a cost model over every token occurring in `patterns`.
///
/// The frequency kind counts token instances weighted by the owning
/// pattern's frequency, so it satisfies the Kraft inequality by
/// construction (`sum 2^-cost = sum f/F = 1`).
pub fn build_cost_model(kind: CostKind, patterns: &[Arc<Pattern>]) -> Result<CostModel> {
    let mut freq: BTreeMap<Token, f64> = BTreeMap::new();
    for p in patterns {
        for t in &p.tokens {
            *freq.entry(t.clone()).or_insert(0.0) += f64::from(p.frequency);
        }
    }
    if freq.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    match kind {
        CostKind::Uniform => CostModel::uniform_over(freq.into_keys()),
        CostKind::Frequency => {
            let total: f64 = freq.values().sum();
            let costs = freq
                .into_iter()
                .map(|(t, f)| (t, (total / f).log2()))
                .collect();
            Ok(CostModel { kind, costs })
        }
    }
}

/// A collection of Old patterns keyed by pattern id.
#[derive(Debug, Clone, Default)]
pub struct Grammar {
    patterns: Vec<Arc<Pattern>>,
}

impl Grammar {
    pub fn new() -> Grammar {
        Grammar { patterns: Vec::new() }
    }

    pub fn from_patterns(patterns: Vec<Arc<Pattern>>) -> Result<Grammar> {
        let mut g = Grammar::new();
        for p in patterns {
            g.add(p)?;
        }
        Ok(g)
    }

    /// Adds a pattern. A pattern with an identical (token list, prefix
    /// length) is unified into the existing entry with summed frequency;
    /// returns `true` when that happened. Duplicate ids are rejected.
    pub fn add(&mut self, p: Arc<Pattern>) -> Result<bool> {
        if let Some(existing) = self
            .patterns
            .iter_mut()
            .find(|q| q.tokens == p.tokens && q.id_prefix_len == p.id_prefix_len)
        {
            let mut merged = (**existing).clone();
            merged.frequency += p.frequency;
            *existing = Arc::new(merged);
            return Ok(true);
        }
        if self.patterns.iter().any(|q| q.pattern_id == p.pattern_id) {
            return Err(Error::Invalid(format!("duplicate pattern id `{}`", p.pattern_id)));
        }
        self.patterns.push(p);
        Ok(false)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Arc<Pattern>] {
        &self.patterns
    }

    pub fn get(&self, pattern_id: &str) -> Option<&Arc<Pattern>> {
        self.patterns.iter().find(|p| p.pattern_id == pattern_id)
    }

    /// Cost model over the grammar plus any extra patterns (typically the
    /// New input, so the alphabet covers both sides of an alignment).
    pub fn cost_model_with(&self, kind: CostKind, extra: &[Arc<Pattern>]) -> Result<CostModel> {
        let mut all = self.patterns.clone();
        all.extend_from_slice(extra);
        build_cost_model(kind, &all)
    }
}
