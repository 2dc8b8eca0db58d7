//! Unsupervised grammar learning by two-part description-length search.
//!
//! Corpus members are processed in order. Each member is aligned against
//! every grammar in a beam of candidate grammars; partial matches yield
//! derived patterns (shared segments, disjunction classes for differing
//! gaps, and an abstract pattern wiring the slots together), while a member
//! no grammar can touch is stored wholesale under fresh identification
//! symbols. Grammars grow by add-one / add-all moves over the newly derived
//! candidates and are ranked by `T = G + E`: grammar bits plus the bits
//! needed to encode the corpus through the grammar. Nothing is ever
//! deleted, so earlier learning survives later learning.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::alignment::Alignment;
use crate::builder::{build_alignments, merge, SearchParams};
use crate::error::{Error, Result};
use crate::grammar::{CostKind, CostModel, Grammar};
use crate::matcher::{find_matches, MatchLimits};
use crate::pattern::{Pattern, Provenance, Role, Token};

/// Knobs for the grammar search.
#[derive(Debug, Clone)]
pub struct LearnParams {
    pub grammar_beam: usize,
    pub align_params: SearchParams,
    pub max_passes: usize,
    /// Seed for deterministic fresh-symbol generation.
    pub id_seed: u64,
    pub cost_kind: CostKind,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            grammar_beam: 10,
            align_params: SearchParams { beam_width: 40, max_stages: 10, top_k: 5, min_hits: 1 },
            max_passes: 3,
            id_seed: 1,
            cost_kind: CostKind::Uniform,
        }
    }
}

/// Deterministic generator of fresh identification tokens `%n` / `#%n`.
#[derive(Debug, Clone)]
pub struct IdGen {
    next: u64,
    reserved: BTreeSet<Token>,
}

impl IdGen {
    pub fn new(seed: u64, reserved: impl IntoIterator<Item = Token>) -> IdGen {
        IdGen { next: seed.max(1), reserved: reserved.into_iter().collect() }
    }

    /// Next unused class token and its end marker.
    pub fn fresh(&mut self) -> (Token, Token) {
        loop {
            let class = format!("%{}", self.next);
            let end = format!("#%{}", self.next);
            self.next += 1;
            if !self.reserved.contains(&class) && !self.reserved.contains(&end) {
                return (class, end);
            }
        }
    }
}

/// Derived patterns with occurrence frequencies, unified by exact
/// (token list, prefix length) identity.
#[derive(Debug, Clone, Default)]
pub struct CandidatePool {
    entries: Vec<(Arc<Pattern>, u32)>,
}

impl CandidatePool {
    pub fn new() -> CandidatePool {
        CandidatePool::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Arc<Pattern>, u32)> {
        self.entries.iter().map(|(p, f)| (p, *f))
    }

    pub fn frequency_of(&self, p: &Pattern) -> Option<u32> {
        self.entries
            .iter()
            .find(|(q, _)| q.tokens == p.tokens && q.id_prefix_len == p.id_prefix_len)
            .map(|(_, f)| *f)
    }

    fn insert(&mut self, p: Arc<Pattern>) {
        if let Some(e) = self
            .entries
            .iter_mut()
            .find(|(q, _)| q.tokens == p.tokens && q.id_prefix_len == p.id_prefix_len)
        {
            e.1 += 1;
        } else {
            self.entries.push((p, 1));
        }
    }
}

/// Inserts a pattern into the pool, unifying with an existing entry that
/// has an identical (token list, prefix length). Value semantics.
pub fn unify_into_pool(pool: &CandidatePool, p: Arc<Pattern>) -> CandidatePool {
    let mut out = pool.clone();
    out.insert(p);
    out
}

/// One slot of a pairwise derivation, in column order.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Slot {
    /// A maximal run of matched columns.
    Matched(Vec<Token>),
    /// Unmatched runs occupying the same inter-match gap.
    Gap { top: Vec<Token>, bottom: Vec<Token> },
}

/// Splits a two-row alignment into matched runs and gap runs, working on
/// the Old row's contents with its own end marker stripped, so learned
/// wrappers don't leak their bookkeeping symbols into derived patterns.
fn derivation_slots(a: &Alignment) -> Result<Vec<Slot>> {
    if a.row_count() != 2 {
        return Err(Error::Invalid(format!(
            "pattern derivation needs exactly 2 rows, got {}",
            a.row_count()
        )));
    }
    let top = a.rows()[0].clone();
    let bottom = a.rows()[1].clone();

    // surviving positions of the bottom row: contents, minus a trailing
    // end marker tied to the row's own class token
    let mut keep: Vec<usize> = (bottom.id_prefix_len..bottom.len()).collect();
    if let Some(class) = bottom.class_token() {
        let marker = format!("#{class}");
        if bottom.tokens.last().map(String::as_str) == Some(marker.as_str()) {
            keep.pop();
        }
    }
    let strip_index: BTreeMap<usize, usize> =
        keep.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let bottom_tokens: Vec<Token> = keep.iter().map(|&p| bottom.tokens[p].clone()).collect();

    // matched pairs (top position, stripped bottom position) in column order
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for col in a.columns() {
        if !col.is_matched() {
            continue;
        }
        if let (Some(tp), Some(bp)) = (col.position_of(0), col.position_of(1)) {
            if let Some(&sp) = strip_index.get(&bp) {
                pairs.push((tp, sp));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(Vec::new());
    }

    let mut slots = Vec::new();
    let gap = |t0: usize, t1: usize, b0: usize, b1: usize, slots: &mut Vec<Slot>| {
        let top_run: Vec<Token> = top.tokens[t0..t1].to_vec();
        let bottom_run: Vec<Token> = bottom_tokens[b0..b1].to_vec();
        if !top_run.is_empty() || !bottom_run.is_empty() {
            slots.push(Slot::Gap { top: top_run, bottom: bottom_run });
        }
    };

    gap(0, pairs[0].0, 0, pairs[0].1, &mut slots);
    let mut run: Vec<Token> = vec![top.tokens[pairs[0].0].clone()];
    for w in pairs.windows(2) {
        let (t_prev, b_prev) = w[0];
        let (t_next, b_next) = w[1];
        if t_next == t_prev + 1 && b_next == b_prev + 1 {
            run.push(top.tokens[t_next].clone());
        } else {
            slots.push(Slot::Matched(std::mem::take(&mut run)));
            gap(t_prev + 1, t_next, b_prev + 1, b_next, &mut slots);
            run.push(top.tokens[t_next].clone());
        }
    }
    slots.push(Slot::Matched(run));
    let (t_last, b_last) = *pairs.last().unwrap();
    gap(t_last + 1, top.len(), b_last + 1, bottom_tokens.len(), &mut slots);
    Ok(slots)
}

fn segment_pattern(class: &str, end: &str, body: &[Token], id: &str) -> Arc<Pattern> {
    let mut tokens = vec![class.to_owned()];
    tokens.extend_from_slice(body);
    tokens.push(end.to_owned());
    Pattern::new(id, tokens, 1, 1, Role::Old, Provenance::Learned)
        .expect("derived segment is well-formed")
        .shared()
}

fn member_pattern(class: &str, end: &str, disc: u32, body: &[Token], id: &str) -> Arc<Pattern> {
    let mut tokens = vec![class.to_owned(), disc.to_string()];
    tokens.extend_from_slice(body);
    tokens.push(end.to_owned());
    Pattern::new(id, tokens, 2, 1, Role::Old, Provenance::Learned)
        .expect("derived class member is well-formed")
        .shared()
}

fn abstract_pattern(class: &str, end: &str, slots: &[Token], id: &str) -> Arc<Pattern> {
    let mut tokens = vec![class.to_owned()];
    for s in slots {
        tokens.push(s.clone());
        tokens.push(format!("#{s}"));
    }
    tokens.push(end.to_owned());
    Pattern::new(id, tokens, 1, 1, Role::Old, Provenance::Learned)
        .expect("derived abstract pattern is well-formed")
        .shared()
}

/// Derives candidate patterns from a two-row alignment: one segment per
/// maximal matched run, segment patterns for unmatched gap runs (two runs
/// sharing a gap become members of one disjunction class, discriminated
/// 0 for the top row and 1 for the bottom), and one abstract pattern
/// listing the `class #class` reference pair of every slot in column order.
///
/// Returns an empty list when the rows share no matched column.
pub fn derive_patterns(a: &Alignment, ids: &mut IdGen) -> Result<Vec<Arc<Pattern>>> {
    let slots = derivation_slots(a)?;
    if slots.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut slot_classes: Vec<Token> = Vec::new();
    for slot in &slots {
        match slot {
            Slot::Matched(body) => {
                let (class, end) = ids.fresh();
                out.push(segment_pattern(&class, &end, body, &class));
                slot_classes.push(class);
            }
            Slot::Gap { top, bottom } => {
                let (class, end) = ids.fresh();
                let mut disc = 0u32;
                if !top.is_empty() {
                    out.push(member_pattern(&class, &end, disc, top, &format!("{class}_{disc}")));
                    disc += 1;
                }
                if !bottom.is_empty() {
                    out.push(member_pattern(&class, &end, disc, bottom, &format!("{class}_{disc}")));
                }
                slot_classes.push(class);
            }
        }
    }
    let (class, end) = ids.fresh();
    out.push(abstract_pattern(&class, &end, &slot_classes, &class));
    Ok(out)
}

/// Total grammar description length: the cost of every symbol of every
/// pattern under the given model.
pub fn grammar_cost(g: &Grammar, cm: &CostModel) -> Result<f64> {
    let mut total = 0.0;
    for p in g.patterns() {
        total += cm.sequence_cost(&p.tokens)?;
    }
    Ok(total)
}

/// Corpus encoding cost: for each member, its raw cost minus the
/// compression difference of the best alignment found (raw cost when no
/// alignment reaches cd > 0).
pub fn corpus_encoding_cost(
    g: &Grammar,
    corpus: &[Arc<Pattern>],
    ap: &SearchParams,
    cm: &CostModel,
) -> Result<f64> {
    let mut total = 0.0;
    for member in corpus {
        total += member_encoding_cost(g, member, ap, cm)?;
    }
    Ok(total)
}

fn member_encoding_cost(
    g: &Grammar,
    member: &Arc<Pattern>,
    ap: &SearchParams,
    cm: &CostModel,
) -> Result<f64> {
    let raw = cm.sequence_cost(&member.tokens)?;
    if g.is_empty() {
        return Ok(raw);
    }
    let results = build_alignments(member, g, ap, cm)?;
    match results.first() {
        Some(best) if best.result.cd > 0.0 => Ok(raw - best.result.cd),
        _ => Ok(raw),
    }
}

/// A grammar with its two-part score.
#[derive(Debug, Clone)]
pub struct ScoredGrammar {
    pub grammar: Grammar,
    pub t: f64,
    pub g_bits: f64,
    pub e_bits: f64,
}

#[derive(Clone)]
struct BeamGrammar {
    patterns: Vec<Arc<Pattern>>,
    signature: Vec<(Vec<Token>, usize)>,
}

impl BeamGrammar {
    fn empty() -> BeamGrammar {
        BeamGrammar { patterns: Vec::new(), signature: Vec::new() }
    }

    fn with(&self, extra: &[Arc<Pattern>]) -> BeamGrammar {
        let mut patterns = self.patterns.clone();
        for p in extra {
            if !patterns
                .iter()
                .any(|q| q.tokens == p.tokens && q.id_prefix_len == p.id_prefix_len)
            {
                patterns.push(Arc::clone(p));
            }
        }
        BeamGrammar::from_patterns(patterns)
    }

    fn from_patterns(patterns: Vec<Arc<Pattern>>) -> BeamGrammar {
        let mut signature: Vec<(Vec<Token>, usize)> = patterns
            .iter()
            .map(|p| (p.tokens.clone(), p.id_prefix_len))
            .collect();
        signature.sort();
        BeamGrammar { patterns, signature }
    }

    fn to_grammar(&self) -> Grammar {
        Grammar::from_patterns(self.patterns.clone()).expect("beam grammars are duplicate-free")
    }
}

/// Shared bookkeeping for body-level reuse of derived patterns: deriving
/// the same segment, class member, or abstract twice yields the same
/// tokens, so pool unification can count occurrences.
#[derive(Default)]
struct ReuseIndex {
    segments: BTreeMap<Vec<Token>, Arc<Pattern>>,
    members: BTreeMap<Vec<Token>, Arc<Pattern>>,
    class_size: BTreeMap<Token, u32>,
    abstracts: BTreeMap<Vec<Token>, Arc<Pattern>>,
}

impl ReuseIndex {
    fn segment(&mut self, body: &[Token], ids: &mut IdGen) -> Arc<Pattern> {
        if let Some(p) = self.segments.get(body) {
            return Arc::clone(p);
        }
        if let Some(p) = self.members.get(body) {
            // the body already lives in a disjunction class; reference that
            return Arc::clone(p);
        }
        let (class, end) = ids.fresh();
        let p = segment_pattern(&class, &end, body, &class);
        self.segments.insert(body.to_vec(), Arc::clone(&p));
        self.class_size.insert(class, 1);
        p
    }

    fn gap_members(
        &mut self,
        top: &[Token],
        bottom: &[Token],
        ids: &mut IdGen,
    ) -> (Token, Vec<Arc<Pattern>>) {
        debug_assert!(!top.is_empty() && !bottom.is_empty());
        let existing_class = self
            .members
            .get(top)
            .or_else(|| self.members.get(bottom))
            .map(|p| (p.tokens[0].clone(), format!("#{}", p.tokens[0])));
        let (class, end) = existing_class.unwrap_or_else(|| {
            let (c, e) = ids.fresh();
            self.class_size.insert(c.clone(), 0);
            (c, e)
        });
        let mut out = Vec::new();
        for body in [top, bottom] {
            if let Some(p) = self.members.get(body) {
                if p.tokens[0] == class {
                    out.push(Arc::clone(p));
                    continue;
                }
            }
            let disc = self.class_size.get(&class).copied().unwrap_or(0);
            let p = member_pattern(&class, &end, disc, body, &format!("{class}_{disc}"));
            self.members.insert(body.to_vec(), Arc::clone(&p));
            self.class_size.insert(class.clone(), disc + 1);
            out.push(p);
        }
        (class, out)
    }

    fn abstract_over(&mut self, slots: &[Token], ids: &mut IdGen) -> Arc<Pattern> {
        if let Some(p) = self.abstracts.get(slots) {
            return Arc::clone(p);
        }
        let (class, end) = ids.fresh();
        let p = abstract_pattern(&class, &end, slots, &class);
        self.abstracts.insert(slots.to_vec(), Arc::clone(&p));
        p
    }

    fn wholesale(&mut self, member: &Arc<Pattern>, ids: &mut IdGen) -> Arc<Pattern> {
        self.segment(&member.tokens, ids)
    }

    /// Derivation with cross-call unification: re-deriving a known body
    /// reuses its tokens instead of minting fresh ones.
    fn derive(&mut self, a: &Alignment, ids: &mut IdGen) -> Result<Vec<Arc<Pattern>>> {
        let slots = derivation_slots(a)?;
        if slots.is_empty() {
            return Ok(Vec::new());
        }
        let mut out: Vec<Arc<Pattern>> = Vec::new();
        let mut slot_classes: Vec<Token> = Vec::new();
        for slot in &slots {
            match slot {
                Slot::Matched(body) => {
                    let p = self.segment(body, ids);
                    slot_classes.push(p.tokens[0].clone());
                    out.push(p);
                }
                Slot::Gap { top, bottom } => {
                    if top.is_empty() || bottom.is_empty() {
                        let body = if top.is_empty() { bottom } else { top };
                        let p = self.segment(body, ids);
                        slot_classes.push(p.tokens[0].clone());
                        out.push(p);
                    } else {
                        let (class, members) = self.gap_members(top, bottom, ids);
                        slot_classes.push(class);
                        out.extend(members);
                    }
                }
            }
        }
        out.push(self.abstract_over(&slot_classes, ids));
        Ok(out)
    }
}

/// Learns grammars from a corpus of New patterns and returns them ranked
/// by `T = G + E` (ascending), best first.
pub fn learn(corpus: &[Arc<Pattern>], params: &LearnParams) -> Result<Vec<ScoredGrammar>> {
    if corpus.is_empty() {
        return Err(Error::Invalid("corpus must contain at least one pattern".into()));
    }
    if params.grammar_beam == 0 || params.max_passes == 0 {
        return Err(Error::Invalid("learning bounds must be at least 1".into()));
    }

    let mut alphabet: BTreeSet<Token> = corpus
        .iter()
        .flat_map(|p| p.tokens.iter().cloned())
        .collect();
    let mut ids = IdGen::new(params.id_seed, alphabet.iter().cloned());
    let mut reuse = ReuseIndex::default();
    let mut pool = CandidatePool::new();
    let mut beam: Vec<BeamGrammar> = vec![BeamGrammar::empty()];
    let mut e_cache: HashMap<(Vec<(Vec<Token>, usize)>, usize, u64), f64> = HashMap::new();

    for pass in 0..params.max_passes {
        for (mi, member) in corpus.iter().enumerate() {
            // 1. derivation against each beam grammar
            let mut derived_all: Vec<Arc<Pattern>> = Vec::new();
            let mut stored: Vec<BeamGrammar> = Vec::new();
            for g in &beam {
                let mut partials = false;
                let mut derived_here: Vec<Arc<Pattern>> = Vec::new();
                let mut patterns: Vec<&Arc<Pattern>> = g.patterns.iter().collect();
                patterns.sort_by(|a, b| a.pattern_id.cmp(&b.pattern_id));
                for p in patterns {
                    let cm_pair = CostModel::uniform_over(
                        member.tokens.iter().chain(p.tokens.iter()).cloned(),
                    )?;
                    let hyps = find_matches(
                        &member.tokens,
                        &p.tokens,
                        MatchLimits { max_hypotheses: 1, min_hits: 1 },
                        &cm_pair,
                    )?;
                    let Some(h) = hyps.first() else { continue };
                    partials = true;
                    let two_row = merge(&Alignment::degenerate(Arc::clone(member)), p, &h.hypothesis)?;
                    derived_here.extend(reuse.derive(&two_row, &mut ids)?);
                }
                if partials {
                    stored.push(g.clone());
                    for d in derived_here {
                        if !derived_all
                            .iter()
                            .any(|q| q.tokens == d.tokens && q.id_prefix_len == d.id_prefix_len)
                        {
                            derived_all.push(d);
                        }
                    }
                } else {
                    // nothing matches: store the member wholesale
                    let w = reuse.wholesale(member, &mut ids);
                    pool.insert(Arc::clone(&w));
                    stored.push(g.with(std::slice::from_ref(&w)));
                }
            }
            for d in &derived_all {
                pool.insert(Arc::clone(d));
                for t in &d.tokens {
                    alphabet.insert(t.clone());
                }
            }
            for g in &stored {
                for p in &g.patterns {
                    for t in &p.tokens {
                        alphabet.insert(t.clone());
                    }
                }
            }

            // 2. expansion moves
            let mut candidates: Vec<BeamGrammar> = Vec::new();
            let mut seen_sigs: BTreeSet<Vec<(Vec<Token>, usize)>> = BTreeSet::new();
            let mut push = |g: BeamGrammar, candidates: &mut Vec<BeamGrammar>| {
                if seen_sigs.insert(g.signature.clone()) {
                    candidates.push(g);
                }
            };
            for g in &stored {
                push(g.clone(), &mut candidates);
                for d in &derived_all {
                    push(g.with(std::slice::from_ref(d)), &mut candidates);
                }
                if derived_all.len() > 1 {
                    push(g.with(&derived_all), &mut candidates);
                }
            }

            // 3. rescore by T over the members seen so far
            let seen_members: &[Arc<Pattern>] =
                if pass == 0 { &corpus[..=mi] } else { corpus };
            let uniform = CostModel::uniform_over(alphabet.iter().cloned())?;
            let bits_tag = uniform.cost(alphabet.iter().next().unwrap())? as u64;
            let mut scored: Vec<(BeamGrammar, f64, f64, f64)> = Vec::new();
            for cand in candidates {
                let grammar = cand.to_grammar();
                let cm = match params.cost_kind {
                    CostKind::Uniform => uniform.clone(),
                    CostKind::Frequency => {
                        grammar.cost_model_with(CostKind::Frequency, seen_members)?
                    }
                };
                let g_bits = grammar_cost(&grammar, &cm)?;
                let mut e_bits = 0.0;
                for (i, m) in seen_members.iter().enumerate() {
                    let key = (cand.signature.clone(), i, bits_tag);
                    let e = match params.cost_kind {
                        CostKind::Uniform => match e_cache.get(&key) {
                            Some(&v) => v,
                            None => {
                                let v =
                                    member_encoding_cost(&grammar, m, &params.align_params, &cm)?;
                                e_cache.insert(key, v);
                                v
                            }
                        },
                        CostKind::Frequency => {
                            member_encoding_cost(&grammar, m, &params.align_params, &cm)?
                        }
                    };
                    e_bits += e;
                }
                scored.push((cand, g_bits + e_bits, g_bits, e_bits));
            }
            scored.sort_by(|a, b| {
                a.1.total_cmp(&b.1)
                    .then(a.2.total_cmp(&b.2))
                    .then_with(|| a.0.signature.cmp(&b.0.signature))
            });
            scored.truncate(params.grammar_beam);
            beam = scored.into_iter().map(|(g, _, _, _)| g).collect();
        }
    }

    // final ranking over the whole corpus
    let uniform = CostModel::uniform_over(alphabet.iter().cloned())?;
    let mut out: Vec<ScoredGrammar> = Vec::new();
    for cand in beam {
        let grammar = cand.to_grammar();
        let cm = match params.cost_kind {
            CostKind::Uniform => uniform.clone(),
            CostKind::Frequency => grammar.cost_model_with(CostKind::Frequency, corpus)?,
        };
        let g_bits = grammar_cost(&grammar, &cm)?;
        let e_bits = corpus_encoding_cost(&grammar, corpus, &params.align_params, &cm)?;
        out.push(ScoredGrammar { grammar, t: g_bits + e_bits, g_bits, e_bits });
    }
    out.sort_by(|a, b| {
        a.t.total_cmp(&b.t)
            .then(a.g_bits.total_cmp(&b.g_bits))
            .then_with(|| {
                let sa: Vec<String> = a.grammar.patterns().iter().map(|p| p.to_string()).collect();
                let sb: Vec<String> = b.grammar.patterns().iter().map(|p| p.to_string()).collect();
                sa.cmp(&sb)
            })
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::MatchHypothesis;

    fn member(text: &str, id: &str) -> Arc<Pattern> {
        Pattern::new_from_text(id, text).unwrap().shared()
    }

    fn two_row(a: &Arc<Pattern>, b_text: &str) -> Alignment {
        // align two raw sequences on their best matching
        let b = Pattern::new(
            "row1",
            b_text.split_whitespace().map(str::to_owned).collect(),
            0,
            1,
            Role::Old,
            Provenance::User,
        )
        .unwrap()
        .shared();
        let cm = CostModel::uniform_over(
            a.tokens.iter().chain(b.tokens.iter()).cloned(),
        )
        .unwrap();
        let hs = find_matches(&a.tokens, &b.tokens, MatchLimits::default(), &cm).unwrap();
        // prefer the contiguous run matching: highest cost, most compact runs
        let best = hs
            .iter()
            .max_by(|x, y| {
                x.cost
                    .total_cmp(&y.cost)
                    .then_with(|| runs(&y.hypothesis).cmp(&runs(&x.hypothesis)))
            })
            .unwrap();
        merge(&Alignment::degenerate(Arc::clone(a)), &b, &best.hypothesis).unwrap()
    }

    fn runs(h: &MatchHypothesis) -> usize {
        let mut n = 1;
        for w in h.pairs.windows(2) {
            if w[1].0 != w[0].0 + 1 || w[1].1 != w[0].1 + 1 {
                n += 1;
            }
        }
        n
    }

    #[test]
    fn derives_segments_classes_and_abstract() {
        let m = member("t h a t b o y r u n s", "m1");
        let a = two_row(&m, "t h a t g i r l r u n s");
        let mut ids = IdGen::new(1, m.tokens.iter().cloned());
        let ps = derive_patterns(&a, &mut ids).unwrap();
        // segments for "t h a t" and "r u n s", a 2-member class for the
        // gap, and the abstract wrapper
        assert_eq!(ps.len(), 5);
        let texts: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
        assert_eq!(texts[0], "%1 : t h a t #%1");
        assert_eq!(texts[1], "%2 0 : b o y #%2");
        assert_eq!(texts[2], "%2 1 : g i r l #%2");
        assert_eq!(texts[3], "%3 : r u n s #%3");
        assert_eq!(texts[4], "%4 : %1 #%1 %2 #%2 %3 #%3 #%4");
        assert!(ps.iter().all(|p| p.provenance == Provenance::Learned));
    }

    #[test]
    fn identical_rows_become_one_segment_plus_wrapper() {
        let m = member("r u n s", "m1");
        let a = two_row(&m, "r u n s");
        let mut ids = IdGen::new(1, m.tokens.iter().cloned());
        let ps = derive_patterns(&a, &mut ids).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].to_string(), "%1 : r u n s #%1");
        assert_eq!(ps[1].to_string(), "%2 : %1 #%1 #%2");
    }

    #[test]
    fn disjoint_rows_derive_nothing() {
        let m = member("a b", "m1");
        let b = Pattern::new(
            "row1",
            vec!["x".into(), "y".into()],
            0,
            1,
            Role::Old,
            Provenance::User,
        )
        .unwrap()
        .shared();
        let a = merge(
            &Alignment::degenerate(m.clone()),
            &b,
            &MatchHypothesis { pairs: vec![] },
        )
        .unwrap();
        // empty-merge alignment is degenerate-per-row; derivation sees no
        // matched columns
        let mut ids = IdGen::new(1, m.tokens.iter().cloned());
        // no matched column: alignment is illegal for scoring but fine here
        assert!(derive_patterns(&a, &mut ids).unwrap().is_empty());
    }

    #[test]
    fn derivation_requires_two_rows() {
        let m = member("a b", "m1");
        let a = Alignment::degenerate(m.clone());
        let mut ids = IdGen::new(1, m.tokens.iter().cloned());
        assert!(derive_patterns(&a, &mut ids).is_err());
    }

    #[test]
    fn id_gen_skips_reserved_tokens() {
        let mut ids = IdGen::new(1, ["%1".to_owned()]);
        let (c, e) = ids.fresh();
        assert_eq!(c, "%2");
        assert_eq!(e, "#%2");
    }

    #[test]
    fn pool_unifies_identical_patterns() {
        let p = member("a b", "p");
        let pool = CandidatePool::new();
        let pool = unify_into_pool(&pool, p.clone());
        let pool = unify_into_pool(&pool, p.clone());
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.frequency_of(&p), Some(2));
        let q = member("a c", "q");
        let pool = unify_into_pool(&pool, q);
        assert_eq!(pool.len(), 2);
    }

    #[test]
    fn pool_unification_is_inductive() {
        let p = member("z z z", "p");
        let mut pool = CandidatePool::new();
        for _ in 0..5 {
            pool = unify_into_pool(&pool, p.clone());
        }
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.frequency_of(&p), Some(5));
    }

    #[test]
    fn empty_grammar_cost_is_zero() {
        let g = Grammar::new();
        let cm = CostModel::uniform_over(["a".to_owned()]).unwrap();
        assert_eq!(grammar_cost(&g, &cm).unwrap(), 0.0);
    }

    #[test]
    fn grammar_cost_is_symbol_count_times_uniform_cost() {
        let p = crate::pattern::parse_pattern_line("X 1 : a b c d", Role::Old, "x")
            .unwrap()
            .shared();
        let g = Grammar::from_patterns(vec![p]).unwrap();
        let cm = CostModel::uniform_over(
            (0..16).map(|i| format!("t{i}")).chain(["X".into(), "1".into(), "a".into(), "b".into(), "c".into(), "d".into()]),
        )
        .unwrap();
        // 22 tokens -> 5 bits each; 6 symbols in the pattern
        assert_eq!(grammar_cost(&g, &cm).unwrap(), 30.0);
    }

    #[test]
    fn single_member_corpus_learns_its_wholesale_pattern() {
        let corpus = vec![member("t h a t b o y r u n s", "m1")];
        let out = learn(&corpus, &LearnParams::default()).unwrap();
        let best = &out[0];
        assert_eq!(best.grammar.len(), 1);
        let p = &best.grammar.patterns()[0];
        assert_eq!(p.id_prefix_len, 1);
        assert!(p.tokens[0].starts_with('%'));
        let body: Vec<&str> = p.tokens[1..p.tokens.len() - 1].iter().map(String::as_str).collect();
        assert_eq!(body.join(" "), "t h a t b o y r u n s");
        // E is the cost of the identification symbol of the one pattern
        let cm = CostModel::uniform_over(
            best.grammar.patterns()[0].tokens.iter().chain(corpus[0].tokens.iter()).cloned(),
        )
        .unwrap();
        assert!((best.e_bits - cm.cost(&p.tokens[0]).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn token_disjoint_corpus_stores_both_wholesale() {
        let corpus = vec![member("a b c", "m1"), member("x y z", "m2")];
        let out = learn(&corpus, &LearnParams::default()).unwrap();
        let best = &out[0];
        assert_eq!(best.grammar.len(), 2);
        for p in best.grammar.patterns() {
            assert_eq!(p.id_prefix_len, 1);
        }
    }

    #[test]
    fn learning_is_deterministic() {
        let corpus = vec![
            member("t h a t b o y r u n s", "m1"),
            member("t h a t g i r l r u n s", "m2"),
        ];
        let a = learn(&corpus, &LearnParams::default()).unwrap();
        let b = learn(&corpus, &LearnParams::default()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.t, y.t);
            let sx: Vec<String> = x.grammar.patterns().iter().map(|p| p.to_string()).collect();
            let sy: Vec<String> = y.grammar.patterns().iter().map(|p| p.to_string()).collect();
            assert_eq!(sx, sy);
        }
    }
}
