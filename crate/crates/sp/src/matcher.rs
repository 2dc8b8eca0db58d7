//! Ordered partial matching between two symbol sequences.
//!
//! A match hypothesis is a monotone set of index pairs over identical
//! tokens: positions increase strictly on both sides, so symbol order is
//! preserved and no match lines cross. Hypotheses are ranked by the summed
//! bit cost of their matched symbols so that rare symbols dominate.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::grammar::CostModel;
use crate::pattern::Token;

/// A monotone pairing of positions between two sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchHypothesis {
    pub pairs: Vec<(usize, usize)>,
}

impl MatchHypothesis {
    pub fn hit_count(&self) -> usize {
        self.pairs.len()
    }

    /// Checks monotonicity and token equality against the owning sequences.
    pub fn is_legal(&self, seq_a: &[Token], seq_b: &[Token]) -> bool {
        if self.pairs.is_empty() {
            return false;
        }
        for w in self.pairs.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return false;
            }
        }
        self.pairs
            .iter()
            .all(|&(i, j)| i < seq_a.len() && j < seq_b.len() && seq_a[i] == seq_b[j])
    }
}

/// Limits for [`find_matches`].
#[derive(Debug, Clone, Copy)]
pub struct MatchLimits {
    pub max_hypotheses: usize,
    pub min_hits: usize,
}

impl Default for MatchLimits {
    fn default() -> Self {
        MatchLimits { max_hypotheses: 200, min_hits: 1 }
    }
}

/// A scored hypothesis in the enumeration order: cost descending, then
/// fewer pairs, then lexicographically smallest pair list.
#[derive(Debug, Clone)]
pub struct ScoredHypothesis {
    pub hypothesis: MatchHypothesis,
    pub cost: f64,
}

struct Lattice {
    /// hit list sorted lexicographically
    hits: Vec<(usize, usize)>,
    /// cost of each hit's token
    weight: Vec<f64>,
    /// best achievable weight of any chain starting strictly after hit k
    suffix: Vec<f64>,
}

impl Lattice {
    fn build(seq_a: &[Token], seq_b: &[Token], cm: &CostModel) -> Result<Lattice> {
        let mut hits = Vec::new();
        let mut weight = Vec::new();
        for (i, ta) in seq_a.iter().enumerate() {
            for (j, tb) in seq_b.iter().enumerate() {
                if ta == tb {
                    hits.push((i, j));
                    weight.push(cm.cost(ta)?);
                }
            }
        }
        // suffix[k]: max total weight over chains whose first hit succeeds hit k
        let mut best_from = vec![0.0f64; hits.len()];
        for k in (0..hits.len()).rev() {
            let (i, j) = hits[k];
            let mut best_next = 0.0f64;
            for m in k + 1..hits.len() {
                let (i2, j2) = hits[m];
                if i2 > i && j2 > j {
                    let v = best_from[m];
                    if v > best_next {
                        best_next = v;
                    }
                }
            }
            best_from[k] = weight[k] + best_next;
        }
        let mut suffix = vec![0.0f64; hits.len()];
        for k in 0..hits.len() {
            let (i, j) = hits[k];
            let mut best = 0.0f64;
            for m in k + 1..hits.len() {
                let (i2, j2) = hits[m];
                if i2 > i && j2 > j && best_from[m] > best {
                    best = best_from[m];
                }
            }
            suffix[k] = best;
        }
        Ok(Lattice { hits, weight, suffix })
    }

    fn successors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.hits[k];
        (k + 1..self.hits.len()).filter(move |&m| self.hits[m].0 > i && self.hits[m].1 > j)
    }
}

/// Exploration state: a chain of hit indices plus its weight and the upper
/// bound on any descendant's weight.
struct Explore {
    chain: Vec<usize>,
    weight: f64,
    bound: f64,
}

impl PartialEq for Explore {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.chain == other.chain
    }
}
impl Eq for Explore {}
impl Ord for Explore {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.chain.cmp(&self.chain))
    }
}
impl PartialOrd for Explore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Emit {
    cost: f64,
    chain: Vec<usize>,
}
impl PartialEq for Emit {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.chain == other.chain
    }
}
impl Eq for Emit {}
impl Ord for Emit {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap by (cost, fewer hits, lexicographically smaller chain)
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| other.chain.len().cmp(&self.chain.len()))
            .then_with(|| other.chain.cmp(&self.chain))
    }
}
impl PartialOrd for Emit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Enumerates monotone matchings in ranked order (cost descending, ties by
/// fewer pairs then lexicographic), up to `cap` results. Every matching is
/// emitted, including non-maximal ones; callers filter as needed.
pub(crate) fn enumerate_matchings(
    seq_a: &[Token],
    seq_b: &[Token],
    cm: &CostModel,
    cap: usize,
    min_hits: usize,
) -> Result<Vec<ScoredHypothesis>> {
    let lat = Lattice::build(seq_a, seq_b, cm)?;
    let mut explore: BinaryHeap<Explore> = BinaryHeap::new();
    let mut ready: BinaryHeap<Emit> = BinaryHeap::new();
    for k in 0..lat.hits.len() {
        let w = lat.weight[k];
        explore.push(Explore { chain: vec![k], weight: w, bound: w + lat.suffix[k] });
    }
    let mut out = Vec::new();
    while out.len() < cap {
        // expand until the best ready matching provably dominates everything
        // still unexplored
        while let Some(top) = explore.peek() {
            let dominated = ready
                .peek()
                .map(|e| e.cost >= top.bound)
                .unwrap_or(false);
            if dominated {
                break;
            }
            let st = explore.pop().unwrap();
            let last = *st.chain.last().unwrap();
            for m in lat.successors(last) {
                let mut chain = st.chain.clone();
                chain.push(m);
                let w = st.weight + lat.weight[m];
                explore.push(Explore { chain, weight: w, bound: w + lat.suffix[m] });
            }
            ready.push(Emit { cost: st.weight, chain: st.chain });
        }
        match ready.pop() {
            Some(e) => {
                if e.chain.len() >= min_hits {
                    let pairs = e.chain.iter().map(|&k| lat.hits[k]).collect();
                    out.push(ScoredHypothesis {
                        hypothesis: MatchHypothesis { pairs },
                        cost: e.cost,
                    });
                }
            }
            None => break,
        }
    }
    Ok(out)
}

/// Finds ranked partial matches between two sequences.
///
/// Up to `limits.max_hypotheses` hypotheses with at least `limits.min_hits`
/// hits, ranked by total matched-symbol cost (descending), ties broken by
/// fewer pairs then by lexicographically smallest pair list. No returned
/// hypothesis is a prefix of another returned hypothesis.
pub fn find_matches(
    seq_a: &[Token],
    seq_b: &[Token],
    limits: MatchLimits,
    cm: &CostModel,
) -> Result<Vec<ScoredHypothesis>> {
    if seq_a.is_empty() || seq_b.is_empty() {
        return Err(Error::EmptySequence);
    }
    if limits.max_hypotheses == 0 {
        return Err(Error::Invalid("max_hypotheses must be at least 1".into()));
    }
    // enumerate with headroom so prefix filtering can still fill the quota
    let cap = limits.max_hypotheses.saturating_mul(4).max(64);
    let raw = enumerate_matchings(seq_a, seq_b, cm, cap, limits.min_hits.max(1))?;
    let mut emitted_prefixes: HashSet<Vec<(usize, usize)>> = HashSet::new();
    let mut out = Vec::new();
    for h in raw {
        // extensions rank above their prefixes (positive costs), so any
        // prefix duplicate has already been recorded
        if emitted_prefixes.contains(&h.hypothesis.pairs) {
            continue;
        }
        for n in 1..=h.hypothesis.pairs.len() {
            emitted_prefixes.insert(h.hypothesis.pairs[..n].to_vec());
        }
        out.push(h);
        if out.len() == limits.max_hypotheses {
            break;
        }
    }
    Ok(out)
}

/// Every maximal monotone matching, by brute force. Oracle for the ranked
/// search; guarded to tiny inputs.
pub fn exhaustive_matches(seq_a: &[Token], seq_b: &[Token]) -> Result<Vec<MatchHypothesis>> {
    if seq_a.is_empty() || seq_b.is_empty() {
        return Err(Error::EmptySequence);
    }
    if seq_a.len() * seq_b.len() > 64 {
        return Err(Error::SizeGuard(format!(
            "{} x {} exceeds the 64-cell exhaustive-match guard",
            seq_a.len(),
            seq_b.len()
        )));
    }
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (i, ta) in seq_a.iter().enumerate() {
        for (j, tb) in seq_b.iter().enumerate() {
            if ta == tb {
                hits.push((i, j));
            }
        }
    }
    let mut out: Vec<MatchHypothesis> = Vec::new();
    let mut chain: Vec<(usize, usize)> = Vec::new();
    fn extendable(hits: &[(usize, usize)], chain: &[(usize, usize)]) -> bool {
        // any hit insertable anywhere while preserving monotonicity?
        hits.iter().any(|&(i, j)| {
            if chain.iter().any(|&(a, b)| a == i || b == j) {
                return false;
            }
            let before = chain.iter().filter(|&&(a, b)| a < i && b < j).count();
            let after = chain.iter().filter(|&&(a, b)| a > i && b > j).count();
            before + after == chain.len()
        })
    }
    fn rec(
        hits: &[(usize, usize)],
        start: usize,
        chain: &mut Vec<(usize, usize)>,
        out: &mut Vec<MatchHypothesis>,
    ) {
        let mut extended = false;
        for k in start..hits.len() {
            let (i, j) = hits[k];
            let ok = chain.last().map(|&(a, b)| i > a && j > b).unwrap_or(true);
            if ok {
                extended = true;
                chain.push((i, j));
                rec(hits, k + 1, chain, out);
                chain.pop();
            }
        }
        if !extended && !chain.is_empty() && !extendable(hits, chain) {
            out.push(MatchHypothesis { pairs: chain.clone() });
        }
    }
    rec(&hits, 0, &mut chain, &mut out);
    out.sort_by(|a, b| a.pairs.cmp(&b.pairs));
    out.dedup();
    Ok(out)
}
