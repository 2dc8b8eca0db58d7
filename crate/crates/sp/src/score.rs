//! Compression scoring of alignments, relative probabilities, and
//! inference extraction.
//!
//! An alignment encodes its New pattern in terms of the Old rows it uses.
//! The code consists of the identification symbols the receiver still needs
//! (those of rows not referenced by any other row) plus any New symbols the
//! alignment failed to match. The compression difference
//!
//! ```text
//! cd = cost(matched New symbols) - cost(identification symbols in the code)
//! ```
//!
//! measures how many bits the alignment saves over transmitting New
//! literally; unmatched New symbols cost the same on both routes and cancel.
//!
//! A row is *referenced* when its class symbol (first identification
//! symbol) lies in a column that also holds a non-identification symbol of
//! another row: some pattern's contents, or New itself, names the row.
//! Referenced rows contribute nothing to the code; their identity is paid
//! for at the reference site. Id-to-id coincidences absorb nothing, so two
//! copies of one pattern can never explain each other's code away.

use crate::alignment::{validate_alignment, Alignment};
use crate::error::{Error, Result};
use crate::grammar::CostModel;
use crate::pattern::{SymbolClass, Token};

/// The code, bit costs, compression difference, and probability attached
/// to an alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedResult {
    /// Residual symbols in column order: unpaid identification symbols
    /// interleaved with unmatched New symbols.
    pub code: Vec<Token>,
    /// Bits of the New symbols the alignment matched.
    pub b_new: f64,
    /// Bits of the code: unpaid identification symbols plus unmatched New.
    pub b_code: f64,
    /// Compression difference; the alignment's score.
    pub cd: f64,
    /// Relative probability among competing alignments, once assigned.
    pub probability: Option<f64>,
}

/// Scores a legal alignment under a cost model.
pub fn encode(a: &Alignment, cm: &CostModel) -> Result<EncodedResult> {
    let report = validate_alignment(a);
    if !report.is_empty() {
        return Err(Error::IllegalAlignment(report[0].to_string()));
    }
    encode_unchecked(a, cm)
}

/// The code split into its two symbol kinds, for search bounds. Code
/// identification symbols carry their row so bounds can reason about
/// whole-row absorption through a future reference.
pub(crate) struct CodeParts {
    pub result: EncodedResult,
    pub id_code: Vec<(usize, Token)>,
    pub unmatched_new: Vec<Token>,
}

/// Scoring without the legality check, for callers that construct
/// alignments through [`crate::builder::merge`] and keep them legal by
/// construction.
pub(crate) fn encode_unchecked(a: &Alignment, cm: &CostModel) -> Result<EncodedResult> {
    Ok(encode_parts(a, cm)?.result)
}

pub(crate) fn encode_parts(a: &Alignment, cm: &CostModel) -> Result<CodeParts> {
    let rows = a.rows();
    // which rows are referenced through their class symbol
    let mut referenced = vec![false; rows.len()];
    for (r, p) in rows.iter().enumerate().skip(1) {
        if p.id_prefix_len == 0 {
            continue;
        }
        if let Some(c) = a.column_of(r, 0) {
            referenced[r] = a.columns()[c]
                .entries()
                .iter()
                .any(|&(r2, p2)| r2 != r && (r2 == 0 || rows[r2].class_of(p2) == SymbolClass::Contents));
        }
    }

    let mut code: Vec<Token> = Vec::new();
    let mut id_code: Vec<(usize, Token)> = Vec::new();
    let mut unmatched_new: Vec<Token> = Vec::new();
    let mut b_new = 0.0f64;
    let mut id_code_cost = 0.0f64;
    let mut unmatched_new_cost = 0.0f64;

    for (ci, col) in a.columns().iter().enumerate() {
        for &(r, p) in col.entries() {
            let tok = &rows[r].tokens[p];
            if r == 0 {
                if col.is_matched() {
                    b_new += cm.cost(tok)?;
                } else {
                    unmatched_new_cost += cm.cost(tok)?;
                    code.push(tok.clone());
                    unmatched_new.push(tok.clone());
                }
            } else if rows[r].class_of(p) == SymbolClass::Identification
                && !referenced[r]
                && !a.column_has_non_id(ci)
            {
                id_code_cost += cm.cost(tok)?;
                code.push(tok.clone());
                id_code.push((r, tok.clone()));
            }
        }
    }

    Ok(CodeParts {
        result: EncodedResult {
            code,
            b_new,
            b_code: id_code_cost + unmatched_new_cost,
            cd: b_new - id_code_cost,
            probability: None,
        },
        id_code,
        unmatched_new,
    })
}

/// Assigns relative probabilities `p_i = 2^(-b_code_i) / sum_j 2^(-b_code_j)`
/// to a set of results competing over the same New pattern.
pub fn relative_probabilities(results: &mut [EncodedResult]) {
    if results.is_empty() {
        return;
    }
    let min = results
        .iter()
        .map(|r| r.b_code)
        .fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = results.iter().map(|r| 2f64.powf(min - r.b_code)).collect();
    let total: f64 = weights.iter().sum();
    for (r, w) in results.iter_mut().zip(weights) {
        r.probability = Some(w / total);
    }
}

/// One inferred symbol: an unmatched contents symbol of an Old row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inference {
    pub token: Token,
    pub row: usize,
    pub column: usize,
}

/// Extracts the alignment's inferences in column order: every unmatched
/// contents symbol of an Old row. Identification symbols are excluded;
/// they are code, not inference.
pub fn infer(a: &Alignment) -> Result<Vec<Inference>> {
    let report = validate_alignment(a);
    if !report.is_empty() {
        return Err(Error::IllegalAlignment(report[0].to_string()));
    }
    let mut out = Vec::new();
    for (ci, col) in a.columns().iter().enumerate() {
        if col.is_matched() {
            continue;
        }
        let (r, p) = col.entries()[0];
        if r > 0 && a.rows()[r].class_of(p) == SymbolClass::Contents {
            out.push(Inference { token: a.rows()[r].tokens[p].clone(), row: r, column: ci });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::Column;
    use crate::grammar::CostModel;
    use crate::pattern::{parse_pattern_line, Pattern, Role};
    use std::sync::Arc;

    fn the_alignment() -> (Alignment, CostModel) {
        let n = Pattern::new_from_text("n", "t h e").unwrap().shared();
        let d = parse_pattern_line("D 8 : t h e #D", Role::Old, "d8")
            .unwrap()
            .shared();
        let mut cols = vec![Column::singleton(1, 0), Column::singleton(1, 1)];
        for i in 0..3 {
            let mut c = Column::singleton(0, i);
            c.insert(1, i + 2);
            cols.push(c);
        }
        cols.push(Column::singleton(1, 5));
        let a = Alignment::from_parts(vec![n.clone(), d.clone()], cols);
        let cm = CostModel::uniform_over(
            n.tokens.iter().chain(d.tokens.iter()).cloned(),
        )
        .unwrap();
        (a, cm)
    }

    #[test]
    fn full_match_pays_only_the_identification_code() {
        let (a, cm) = the_alignment();
        // alphabet {D,8,t,h,e,#D}: 6 tokens -> 3 bits each
        let r = encode(&a, &cm).unwrap();
        assert_eq!(r.code, vec!["D".to_string(), "8".to_string()]);
        assert_eq!(r.b_new, 9.0);
        assert_eq!(r.b_code, 6.0);
        assert_eq!(r.cd, 3.0);
    }

    #[test]
    fn degenerate_alignment_scores_zero() {
        let n = Pattern::new_from_text("n", "t h e").unwrap().shared();
        let a = Alignment::degenerate(n.clone());
        let cm = CostModel::uniform_over(n.tokens.iter().cloned()).unwrap();
        let r = encode(&a, &cm).unwrap();
        assert_eq!(r.code, vec!["t", "h", "e"]);
        assert_eq!(r.cd, 0.0);
        assert_eq!(r.b_new, 0.0);
    }

    #[test]
    fn missing_token_is_an_error() {
        let (a, _) = the_alignment();
        let cm = CostModel::uniform_over(["t".to_owned()]).unwrap();
        assert!(matches!(encode(&a, &cm), Err(Error::MissingToken(_))));
    }

    #[test]
    fn equal_code_costs_split_evenly() {
        let mut rs = vec![
            EncodedResult { code: vec![], b_new: 0.0, b_code: 5.0, cd: 0.0, probability: None },
            EncodedResult { code: vec![], b_new: 0.0, b_code: 5.0, cd: 0.0, probability: None },
        ];
        relative_probabilities(&mut rs);
        assert!((rs[0].probability.unwrap() - 0.5).abs() < 1e-12);
        assert!((rs[1].probability.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_bit_gap_gives_two_to_one_odds() {
        let mut rs = vec![
            EncodedResult { code: vec![], b_new: 0.0, b_code: 4.0, cd: 0.0, probability: None },
            EncodedResult { code: vec![], b_new: 0.0, b_code: 5.0, cd: 0.0, probability: None },
        ];
        relative_probabilities(&mut rs);
        assert!((rs[0].probability.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((rs[1].probability.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_result_gets_probability_one() {
        let mut rs = vec![EncodedResult {
            code: vec![],
            b_new: 0.0,
            b_code: 7.0,
            cd: 0.0,
            probability: None,
        }];
        relative_probabilities(&mut rs);
        assert_eq!(rs[0].probability, Some(1.0));
    }

    #[test]
    fn inference_reads_unmatched_contents_in_column_order() {
        // New "t e" matched to D-pattern positions t,e: infers h and #D
        let n = Pattern::new_from_text("n", "t e").unwrap().shared();
        let d = parse_pattern_line("D 8 : t h e #D", Role::Old, "d8")
            .unwrap()
            .shared();
        let mut c_t = Column::singleton(0, 0);
        c_t.insert(1, 2);
        let mut c_e = Column::singleton(0, 1);
        c_e.insert(1, 4);
        let cols = vec![
            Column::singleton(1, 0),
            Column::singleton(1, 1),
            c_t,
            Column::singleton(1, 3),
            c_e,
            Column::singleton(1, 5),
        ];
        let a = Alignment::from_parts(vec![n, d], cols);
        let inf = infer(&a).unwrap();
        let tokens: Vec<&str> = inf.iter().map(|i| i.token.as_str()).collect();
        assert_eq!(tokens, vec!["h", "#D"]);
        assert!(inf.iter().all(|i| i.row == 1));
    }

    #[test]
    fn fully_matched_alignment_infers_nothing() {
        // two identical single-symbol rows
        let n = Pattern::new_from_text("n", "a").unwrap().shared();
        let o = Pattern::new("o", vec!["a".into()], 0, 1, Role::Old, crate::pattern::Provenance::User)
            .unwrap()
            .shared();
        let mut c = Column::singleton(0, 0);
        c.insert(1, 0);
        let a = Alignment::from_parts(vec![n, o], vec![c]);
        assert!(infer(&a).unwrap().is_empty());
    }

    #[test]
    fn duplicate_rows_cannot_absorb_each_others_code() {
        // New "t h e" + the D-pattern twice, second copy stacked on the first
        let n = Pattern::new_from_text("n", "t h e").unwrap().shared();
        let d = parse_pattern_line("D 8 : t h e #D", Role::Old, "d8")
            .unwrap()
            .shared();
        let mut cols: Vec<Column> = Vec::new();
        let mut c = Column::singleton(1, 0);
        c.insert(2, 0);
        cols.push(c);
        let mut c = Column::singleton(1, 1);
        c.insert(2, 1);
        cols.push(c);
        for i in 0..3 {
            let mut c = Column::singleton(0, i);
            c.insert(1, i + 2);
            c.insert(2, i + 2);
            cols.push(c);
        }
        let mut c = Column::singleton(1, 5);
        c.insert(2, 5);
        cols.push(c);
        let a = Alignment::from_parts(vec![n, d.clone(), d], cols);
        let cm = CostModel::uniform_over(
            ["t", "h", "e", "D", "8", "#D"].into_iter().map(str::to_owned),
        )
        .unwrap();
        let r = encode(&a, &cm).unwrap();
        // both copies pay their ids: the id-to-id columns absorb nothing
        assert_eq!(r.code.len(), 4);
        assert!(r.cd < 3.0);
    }
}
