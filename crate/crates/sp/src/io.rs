//! Flat-file formats and structured export.
//!
//! Grammar and corpus files hold one pattern per line. `;` starts a
//! comment, symbols are whitespace-separated, an optional `(<freq>)` prefix
//! carries the frequency, and a single optional `:` separates the
//! identification prefix from the contents. Corpus files admit neither
//! `(freq)` nor `:`.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alignment::Alignment;
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::pattern::{parse_pattern_line, Pattern, Role};
use crate::score::EncodedResult;

fn strip_comment(line: &str) -> &str {
    match line.find(';') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses grammar text. Returns the grammar plus one warning per duplicate
/// pattern that was unified into an earlier entry.
pub fn parse_grammar(text: &str) -> Result<(Grammar, Vec<String>)> {
    let mut g = Grammar::new();
    let mut warnings = Vec::new();
    let mut next_id = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        next_id += 1;
        let p = parse_pattern_line(line, Role::Old, &format!("g{next_id}"))
            .map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })?;
        if g.add(p.shared())
            .map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })?
        {
            warnings.push(format!(
                "line {}: duplicate pattern unified with an earlier entry",
                lineno + 1
            ));
        }
    }
    Ok((g, warnings))
}

pub fn load_grammar(path: impl AsRef<Path>) -> Result<(Grammar, Vec<String>)> {
    parse_grammar(&std::fs::read_to_string(path)?)
}

/// Serializes a grammar in the grammar file format.
pub fn grammar_to_string(g: &Grammar) -> String {
    let mut out = String::new();
    for p in g.patterns() {
        let mut line = String::new();
        let _ = write!(line, "({}) ", p.frequency);
        for (i, t) in p.tokens.iter().enumerate() {
            if i == p.id_prefix_len && p.id_prefix_len > 0 {
                line.push_str(": ");
            }
            line.push_str(t);
            if i + 1 < p.tokens.len() {
                line.push(' ');
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn save_grammar(g: &Grammar, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, grammar_to_string(g))?;
    Ok(())
}

/// Parses corpus text into New patterns.
pub fn parse_corpus(text: &str) -> Result<Vec<Arc<Pattern>>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let p = parse_pattern_line(line, Role::New, &format!("n{}", out.len() + 1))
            .map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })?;
        out.push(p.shared());
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Arc<Pattern>>> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

/// One row of an exported alignment record.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RowRecord {
    pub pattern_id: String,
    pub role: String,
    pub tokens: Vec<String>,
}

/// Structured, diff-friendly form of a scored alignment.
///
/// Columns map row index to symbol position; keys serialize in the order
/// rows, columns, code, b_new, b_code, cd, probability.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AlignmentRecord {
    pub rows: Vec<RowRecord>,
    pub columns: Vec<std::collections::BTreeMap<String, usize>>,
    pub code: Vec<String>,
    pub b_new: f64,
    pub b_code: f64,
    pub cd: f64,
    pub probability: Option<f64>,
}

impl AlignmentRecord {
    pub fn from_alignment(a: &Alignment, result: &EncodedResult) -> AlignmentRecord {
        let rows = a
            .rows()
            .iter()
            .map(|p| RowRecord {
                pattern_id: p.pattern_id.clone(),
                role: match p.role {
                    Role::New => "New".to_owned(),
                    Role::Old => "Old".to_owned(),
                },
                tokens: p.tokens.clone(),
            })
            .collect();
        let columns = a
            .columns()
            .iter()
            .map(|c| {
                c.entries()
                    .iter()
                    .map(|&(r, p)| (r.to_string(), p))
                    .collect()
            })
            .collect();
        AlignmentRecord {
            rows,
            columns,
            code: result.code.clone(),
            b_new: result.b_new,
            b_code: result.b_code,
            cd: result.cd,
            probability: result.probability,
        }
    }
}

/// Exports a scored alignment as a JSON document.
pub fn export_alignment(a: &Alignment, result: &EncodedResult) -> Result<String> {
    let rec = AlignmentRecord::from_alignment(a, result);
    serde_json::to_string_pretty(&rec).map_err(|e| Error::Invalid(e.to_string()))
}

/// Round-trip parse of an exported record.
pub fn parse_alignment_record(json: &str) -> Result<AlignmentRecord> {
    serde_json::from_str(json).map_err(|e| Error::Invalid(e.to_string()))
}
