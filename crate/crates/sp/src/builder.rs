//! Staged heuristic construction of multiple alignments.
//!
//! Search proceeds in stages from the degenerate alignment of the New
//! pattern. Each stage matches every beam member's projection against every
//! grammar pattern, merges the hypotheses into extended alignments,
//! rescores, and keeps the best `beam_width` states. Results are ranked by
//! compression difference with a structural tie-break chain so that equal
//! scores resolve toward the tighter, deeper parse and runs are fully
//! deterministic.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

use crate::alignment::{validate_alignment, Alignment, Column};
use crate::error::{Error, Result};
use crate::grammar::{CostModel, Grammar};
use crate::matcher::{enumerate_matchings, MatchHypothesis};
use crate::pattern::{Pattern, Provenance, Role, Token};
use crate::score::{encode_unchecked, EncodedResult};

/// Knobs for the staged search.
#[derive(Debug, Clone)]
pub struct SearchParams {
    pub beam_width: usize,
    pub max_stages: usize,
    pub top_k: usize,
    pub min_hits: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { beam_width: 200, max_stages: 20, top_k: 10, min_hits: 1 }
    }
}

/// Stages tolerated without a strictly better compression difference before
/// the search stops. Chains of merges that pay off only at the end (a
/// pattern absorbing the identification symbols of rows added earlier) need
/// a few flat stages to complete.
const STAGE_PATIENCE: usize = 4;

/// Hypothesis cap per (beam member, pattern) pair inside the search.
const HYPOTHESES_PER_PAIR: usize = 200;

/// An alignment with its score.
#[derive(Debug, Clone)]
pub struct RankedAlignment {
    pub alignment: Alignment,
    pub result: EncodedResult,
}

/// Projects an alignment onto a symbol sequence: one symbol per column in
/// column order. Matched columns contribute their unified token once.
pub fn project(a: &Alignment) -> Result<Vec<Token>> {
    let report = validate_alignment(a);
    if !report.is_empty() {
        return Err(Error::IllegalAlignment(report[0].to_string()));
    }
    Ok(projection_tokens(a))
}

fn projection_tokens(a: &Alignment) -> Vec<Token> {
    (0..a.columns().len())
        .map(|c| a.column_token(c).to_owned())
        .collect()
}

/// Per-column flag: the column is already matched and supported by a
/// non-identification symbol, so pairing onto it adds no new information.
fn saturated_columns(a: &Alignment) -> Vec<bool> {
    (0..a.columns().len())
        .map(|c| a.columns()[c].is_matched() && a.column_has_non_id(c))
        .collect()
}

/// Merges pattern `p` into alignment `a` as a new bottom row, following a
/// match hypothesis between `project(a)` and `p`'s symbols.
///
/// Matched positions join the hypothesised columns; unmatched symbols of
/// `p` get fresh singleton columns packed against their nearest matched
/// neighbour (prefix runs sit just before the first matched column, every
/// other run just after the run's left anchor). The input alignment is
/// untouched.
pub fn merge(a: &Alignment, p: &Arc<Pattern>, m: &MatchHypothesis) -> Result<Alignment> {
    let row = a.row_count();
    let cols = a.columns();
    for w in m.pairs.windows(2) {
        if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
            return Err(Error::BadMerge("hypothesis is not monotone".into()));
        }
    }
    for &(ci, pj) in &m.pairs {
        if ci >= cols.len() || pj >= p.len() {
            return Err(Error::BadMerge("hypothesis points outside its sequences".into()));
        }
        if a.column_token(ci) != p.tokens[pj] {
            return Err(Error::BadMerge(format!(
                "token mismatch at column {ci}: `{}` vs `{}`",
                a.column_token(ci),
                p.tokens[pj]
            )));
        }
    }

    let mut out: Vec<Column> = Vec::with_capacity(cols.len() + p.len());
    let mut rows = a.rows().to_vec();
    rows.push(Arc::clone(p));

    if m.pairs.is_empty() {
        out.extend(cols.iter().cloned());
        out.extend((0..p.len()).map(|j| Column::singleton(row, j)));
        return Ok(Alignment::from_parts(rows, out));
    }

    let first_col = m.pairs[0].0;
    let mut pair_iter = m.pairs.iter().peekable();
    let mut next_unmatched = 0usize; // next unplaced position of p

    for (ci, col) in cols.iter().enumerate() {
        if ci == first_col {
            // prefix run sits immediately before the first matched column
            while next_unmatched < m.pairs[0].1 {
                out.push(Column::singleton(row, next_unmatched));
                next_unmatched += 1;
            }
        }
        let mut col = col.clone();
        if let Some(&&(pc, pj)) = pair_iter.peek() {
            if pc == ci {
                col.insert(row, pj);
                pair_iter.next();
                out.push(col);
                next_unmatched = pj + 1;
                // run after this anchor, up to the next pair's position
                let stop = pair_iter.peek().map(|&&(_, nj)| nj).unwrap_or(p.len());
                while next_unmatched < stop {
                    out.push(Column::singleton(row, next_unmatched));
                    next_unmatched += 1;
                }
                continue;
            }
        }
        out.push(col);
    }
    Ok(Alignment::from_parts(rows, out))
}

/// Cached ranking data for one candidate.
struct Candidate {
    alignment: Alignment,
    result: EncodedResult,
    support: usize,
    rows: usize,
    dangling: usize,
    row_ids: Vec<String>,
    key: Vec<u8>,
}

impl Candidate {
    fn build(alignment: Alignment, result: EncodedResult) -> Candidate {
        let support = alignment.support_column_count();
        let rows = alignment.row_count();
        let dangling = alignment.dangling_contents_count();
        let row_ids = alignment.row_id_multiset();
        let key = alignment.canonical_key();
        Candidate { alignment, result, support, rows, dangling, row_ids, key }
    }
}

/// Deterministic total order: cd descending, then more supported matched
/// columns, then fewer rows, then fewer dangling contents symbols, then the
/// sorted row id list, then the canonical structure key.
fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.result
        .cd
        .total_cmp(&a.result.cd)
        .then(b.support.cmp(&a.support))
        .then(a.rows.cmp(&b.rows))
        .then(a.dangling.cmp(&b.dangling))
        .then_with(|| a.row_ids.cmp(&b.row_ids))
        .then_with(|| a.key.cmp(&b.key))
}

/// Builds alignments of `new_p` against the grammar by staged beam search
/// and returns up to `top_k` results ranked by compression difference.
/// Alignments that match no New symbol or compress worse than literal
/// transmission (cd < 0) are not reported. The list is empty when nothing
/// scores at cd >= 0.
pub fn build_alignments(
    new_p: &Arc<Pattern>,
    g: &Grammar,
    params: &SearchParams,
    cm: &CostModel,
) -> Result<Vec<RankedAlignment>> {
    if new_p.is_empty() {
        return Err(Error::EmptySequence);
    }
    if params.beam_width == 0 || params.max_stages == 0 || params.top_k == 0 {
        return Err(Error::Invalid("search bounds must be at least 1".into()));
    }
    let seed = Alignment::degenerate(Arc::clone(new_p));
    let seed_result = encode_unchecked(&seed, cm)?;
    let mut beam: Vec<Candidate> = vec![Candidate::build(seed, seed_result)];

    let mut seen: HashSet<Vec<u8>> = beam.iter().map(|c| c.key.clone()).collect();
    let mut results: Vec<Candidate> = Vec::new();
    let mut best_cd = 0.0f64;
    let mut flat_stages = 0usize;

    let mut patterns: Vec<&Arc<Pattern>> = g.patterns().iter().collect();
    patterns.sort_by(|a, b| a.pattern_id.cmp(&b.pattern_id));

    for _stage in 0..params.max_stages {
        let mut fresh: Vec<Candidate> = Vec::new();
        for member in &beam {
            let proj = projection_tokens(&member.alignment);
            let saturated = saturated_columns(&member.alignment);
            for p in &patterns {
                let hyps = enumerate_matchings(
                    &proj,
                    &p.tokens,
                    cm,
                    HYPOTHESES_PER_PAIR,
                    params.min_hits.max(1),
                )?;
                for h in hyps {
                    // a merge must pin down something new: at least one pair
                    // on a column that is not already a supported match
                    if h.hypothesis.pairs.iter().all(|&(ci, _)| saturated[ci]) {
                        continue;
                    }
                    let merged = merge(&member.alignment, p, &h.hypothesis)?;
                    let cand = Candidate::build(merged, EncodedResult {
                        code: Vec::new(),
                        b_new: 0.0,
                        b_code: 0.0,
                        cd: 0.0,
                        probability: None,
                    });
                    if seen.contains(&cand.key) {
                        continue;
                    }
                    seen.insert(cand.key.clone());
                    let result = encode_unchecked(&cand.alignment, cm)?;
                    fresh.push(Candidate { result, ..cand });
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        let stage_best = fresh
            .iter()
            .map(|c| c.result.cd)
            .fold(f64::NEG_INFINITY, f64::max);
        for c in &fresh {
            if c.result.cd >= 0.0 && c.result.b_new > 0.0 {
                results.push(Candidate {
                    alignment: c.alignment.clone(),
                    result: c.result.clone(),
                    support: c.support,
                    rows: c.rows,
                    dangling: c.dangling,
                    row_ids: c.row_ids.clone(),
                    key: c.key.clone(),
                });
            }
        }
        beam.extend(fresh);
        beam.sort_by(rank);
        beam.truncate(params.beam_width);
        results.sort_by(rank);
        results.truncate(params.top_k.max(params.beam_width));
        if stage_best > best_cd {
            best_cd = stage_best;
            flat_stages = 0;
        } else {
            flat_stages += 1;
            if flat_stages >= STAGE_PATIENCE {
                break;
            }
        }
    }

    // compressive alignments win outright; zero-gain ones are reported only
    // when nothing compresses, so recognition still returns its best guess
    if results.iter().any(|c| c.result.cd > 0.0) {
        results.retain(|c| c.result.cd > 0.0);
    }
    results.sort_by(rank);
    results.truncate(params.top_k);
    Ok(results
        .into_iter()
        .map(|c| RankedAlignment { alignment: c.alignment, result: c.result })
        .collect())
}

/// Enumerates every nonempty monotone matching between two sequences.
fn all_matchings(seq_a: &[Token], seq_b: &[Token]) -> Vec<MatchHypothesis> {
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (i, ta) in seq_a.iter().enumerate() {
        for (j, tb) in seq_b.iter().enumerate() {
            if ta == tb {
                hits.push((i, j));
            }
        }
    }
    let mut out = Vec::new();
    let mut chain: Vec<(usize, usize)> = Vec::new();
    fn rec(
        hits: &[(usize, usize)],
        start: usize,
        chain: &mut Vec<(usize, usize)>,
        out: &mut Vec<MatchHypothesis>,
    ) {
        for k in start..hits.len() {
            let (i, j) = hits[k];
            let ok = chain.last().map(|&(a, b)| i > a && j > b).unwrap_or(true);
            if ok {
                chain.push((i, j));
                out.push(MatchHypothesis { pairs: chain.clone() });
                rec(hits, k + 1, chain, out);
                chain.pop();
            }
        }
    }
    rec(&hits, 0, &mut chain, &mut out);
    out
}

/// Globally optimal alignment by exhaustive enumeration. Oracle for
/// [`build_alignments`]; guarded to tiny instances. Returns `None` when no
/// alignment reaches cd >= 0 with at least one matched New symbol.
///
/// Enumeration is complete over legal alignments within the guards; a
/// sound optimistic bound prunes branches that provably cannot reach the
/// best compression difference found so far. The bound allows for every
/// still-unmatched New symbol whose token occurs in the grammar and for
/// every code symbol some pattern's contents (or New itself) could still
/// absorb; branches that can at best tie stay open so tie-breaking sees
/// them.
pub fn exhaustive_build(
    new_p: &Arc<Pattern>,
    g: &Grammar,
    cm: &CostModel,
) -> Result<Option<RankedAlignment>> {
    if new_p.len() > 8 {
        return Err(Error::SizeGuard("New pattern longer than 8 symbols".into()));
    }
    if g.len() > 4 {
        return Err(Error::SizeGuard("more than 4 grammar patterns".into()));
    }
    if g.patterns().iter().any(|p| p.len() > 6) {
        return Err(Error::SizeGuard("grammar pattern longer than 6 symbols".into()));
    }
    const MAX_ROWS: usize = 5;
    const STATE_CAP: usize = 2_000_000;

    let mut patterns: Vec<&Arc<Pattern>> = g.patterns().iter().collect();
    patterns.sort_by(|a, b| a.pattern_id.cmp(&b.pattern_id));

    // tokens a New symbol could still match against
    let matchable: HashSet<&str> = patterns
        .iter()
        .flat_map(|p| p.tokens.iter().map(String::as_str))
        .collect();
    // tokens that some non-identification symbol could still absorb
    let absorbing: HashSet<&str> = patterns
        .iter()
        .flat_map(|p| p.tokens[p.id_prefix_len..].iter().map(String::as_str))
        .chain(new_p.tokens.iter().map(String::as_str))
        .collect();

    let bound = |a: &Alignment, parts: &crate::score::CodeParts| -> Result<f64> {
        let mut ub = parts.result.cd;
        for (r, t) in &parts.id_code {
            // a future reference to the row's class absorbs its whole id
            // prefix; otherwise only symbols something can sit on directly
            let class_referencable = a.rows()[*r]
                .class_token()
                .map(|c| absorbing.contains(c))
                .unwrap_or(false);
            if class_referencable || absorbing.contains(t.as_str()) {
                ub += cm.cost(t)?;
            }
        }
        for t in &parts.unmatched_new {
            if matchable.contains(t.as_str()) {
                ub += cm.cost(t)?;
            }
        }
        Ok(ub)
    };

    let seed = Alignment::degenerate(Arc::clone(new_p));
    let mut frontier = vec![seed];
    let mut seen: HashSet<Vec<u8>> = frontier.iter().map(Alignment::canonical_key).collect();
    let mut best: Option<Candidate> = None;

    while let Some(a) = frontier.pop() {
        if seen.len() > STATE_CAP {
            return Err(Error::SizeGuard("exhaustive search state explosion".into()));
        }
        let parts = crate::score::encode_parts(&a, cm)?;
        let ub = bound(&a, &parts)?;
        let result = parts.result;
        if result.cd >= 0.0 && result.b_new > 0.0 {
            let cand = Candidate::build(a.clone(), result);
            let better = match &best {
                None => true,
                Some(b) => rank(&cand, b) == Ordering::Less,
            };
            if better {
                best = Some(cand);
            }
        }
        let floor = best.as_ref().map(|b| b.result.cd).unwrap_or(0.0);
        if ub < floor || a.row_count() >= MAX_ROWS {
            continue;
        }
        let proj = projection_tokens(&a);
        for p in &patterns {
            for m in all_matchings(&proj, &p.tokens) {
                let merged = merge(&a, p, &m)?;
                let key = merged.canonical_key();
                if seen.insert(key) {
                    frontier.push(merged);
                }
            }
        }
    }
    Ok(best.map(|c| RankedAlignment { alignment: c.alignment, result: c.result }))
}

/// Multiple alignment of plain sequences, scored by unification saving
/// `U = sum over columns of (n_c - 1) * cost(token)`.
///
/// The first sequence seeds row 0; the staged search then works in
/// sequence order, extending each beam member with one not-yet-placed
/// sequence per stage, so every input ends up as exactly one row.
pub fn msa_build(
    seqs: &[Arc<Pattern>],
    params: &SearchParams,
) -> Result<(Alignment, f64)> {
    if seqs.len() < 2 {
        return Err(Error::Invalid("multiple alignment needs at least 2 sequences".into()));
    }
    for s in seqs {
        if s.is_empty() {
            return Err(Error::EmptySequence);
        }
        if s.id_prefix_len != 0 {
            return Err(Error::Invalid(
                "multiple alignment takes plain sequences without identification prefixes".into(),
            ));
        }
    }
    let cm = CostModel::uniform_over(seqs.iter().flat_map(|s| s.tokens.iter().cloned()))?;

    // internal role bookkeeping: row 0 New, the rest Old
    let as_role = |p: &Arc<Pattern>, role: Role| -> Arc<Pattern> {
        if p.role == role {
            Arc::clone(p)
        } else {
            Pattern::new(
                p.pattern_id.clone(),
                p.tokens.clone(),
                0,
                p.frequency,
                role,
                Provenance::User,
            )
            .expect("re-rolled sequence is valid")
            .shared()
        }
    };
    let row0 = as_role(&seqs[0], Role::New);
    let rest: Vec<Arc<Pattern>> = seqs[1..].iter().map(|p| as_role(p, Role::Old)).collect();

    struct MsaState {
        alignment: Alignment,
        placed: Vec<bool>,
        u: f64,
        key: Vec<u8>,
    }
    let unification_saving = |a: &Alignment| -> Result<f64> {
        let mut u = 0.0;
        for c in 0..a.columns().len() {
            let n = a.columns()[c].len();
            if n >= 2 {
                u += (n as f64 - 1.0) * cm.cost(a.column_token(c))?;
            }
        }
        Ok(u)
    };

    let seed = Alignment::degenerate(row0);
    let seed_u = unification_saving(&seed)?;
    let mut beam = vec![MsaState {
        key: seed.canonical_key(),
        alignment: seed,
        placed: vec![false; rest.len()],
        u: seed_u,
    }];

    for _stage in 0..rest.len() {
        let mut fresh: Vec<MsaState> = Vec::new();
        let mut seen: HashSet<(Vec<bool>, Vec<u8>)> = HashSet::new();
        for st in &beam {
            let proj = projection_tokens(&st.alignment);
            for (i, s) in rest.iter().enumerate() {
                if st.placed[i] {
                    continue;
                }
                let mut placed = st.placed.clone();
                placed[i] = true;
                let mut hyps =
                    enumerate_matchings(&proj, &s.tokens, &cm, HYPOTHESES_PER_PAIR, 1)?;
                if hyps.is_empty() {
                    hyps.push(crate::matcher::ScoredHypothesis {
                        hypothesis: MatchHypothesis { pairs: Vec::new() },
                        cost: 0.0,
                    });
                }
                for h in hyps {
                    let merged = merge(&st.alignment, s, &h.hypothesis)?;
                    let key = merged.canonical_key();
                    if !seen.insert((placed.clone(), key.clone())) {
                        continue;
                    }
                    let u = unification_saving(&merged)?;
                    fresh.push(MsaState { alignment: merged, placed: placed.clone(), u, key });
                }
            }
        }
        fresh.sort_by(|a, b| b.u.total_cmp(&a.u).then_with(|| a.key.cmp(&b.key)));
        fresh.truncate(params.beam_width);
        beam = fresh;
    }
    let best = beam
        .into_iter()
        .next()
        .ok_or_else(|| Error::Invalid("multiple alignment search emptied its beam".into()))?;
    Ok((best.alignment, best.u))
}
