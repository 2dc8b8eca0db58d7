//! Alignments: one New row plus zero or more Old rows arranged into ordered
//! columns so that matched symbols line up without crossing.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::pattern::{Pattern, Role, SymbolClass};

/// One column of an alignment: a partial mapping row index -> symbol
/// position, kept sorted by row. At most one symbol per row; two or more
/// entries mean the symbols are matched (all tokens identical).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    entries: Vec<(usize, usize)>,
}

impl Column {
    pub fn singleton(row: usize, pos: usize) -> Column {
        Column { entries: vec![(row, pos)] }
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_matched(&self) -> bool {
        self.entries.len() >= 2
    }

    pub fn position_of(&self, row: usize) -> Option<usize> {
        self.entries
            .iter()
            .find(|(r, _)| *r == row)
            .map(|(_, p)| *p)
    }

    pub(crate) fn insert(&mut self, row: usize, pos: usize) {
        let at = self.entries.partition_point(|(r, _)| *r < row);
        self.entries.insert(at, (row, pos));
    }

    /// Row span covered by the match line, when matched.
    pub fn row_span(&self) -> Option<(usize, usize)> {
        if !self.is_matched() {
            return None;
        }
        Some((self.entries[0].0, self.entries[self.entries.len() - 1].0))
    }
}

/// An SP-multiple-alignment. Row 0 is the New pattern; rows 1.. are Old
/// patterns (the same Old pattern may occupy several rows). Every symbol
/// instance of every row sits in exactly one column.
#[derive(Debug, Clone)]
pub struct Alignment {
    rows: Vec<Arc<Pattern>>,
    columns: Vec<Column>,
}

/// A single legality violation. Violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Column holds two or more distinct tokens.
    MixedColumn { column: usize },
    /// Column holds more than one symbol of the same row.
    DuplicateRow { column: usize, row: usize },
    /// A row's positions do not increase strictly across the column order.
    Crossing { row: usize, column: usize },
    /// A symbol instance appears in no column.
    MissingSymbol { row: usize, pos: usize },
    /// A symbol instance appears in more than one column.
    DuplicateSymbol { row: usize, pos: usize },
    /// A column references a position outside its row.
    OutOfRange { column: usize, row: usize },
    /// Row 0 is not a New pattern, or a later row is not Old.
    BadRole { row: usize },
    /// A column holds no symbols at all.
    EmptyColumn { column: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MixedColumn { column } => write!(f, "column {column} mixes distinct tokens"),
            Violation::DuplicateRow { column, row } => {
                write!(f, "column {column} holds row {row} twice")
            }
            Violation::Crossing { row, column } => {
                write!(f, "row {row} crosses at column {column}")
            }
            Violation::MissingSymbol { row, pos } => {
                write!(f, "row {row} position {pos} appears in no column")
            }
            Violation::DuplicateSymbol { row, pos } => {
                write!(f, "row {row} position {pos} appears in several columns")
            }
            Violation::OutOfRange { column, row } => {
                write!(f, "column {column} points outside row {row}")
            }
            Violation::BadRole { row } => write!(f, "row {row} has the wrong role"),
            Violation::EmptyColumn { column } => write!(f, "column {column} is empty"),
        }
    }
}

impl Alignment {
    /// The degenerate alignment of a single pattern: one singleton column
    /// per symbol.
    pub fn degenerate(new_pattern: Arc<Pattern>) -> Alignment {
        let columns = (0..new_pattern.len()).map(|p| Column::singleton(0, p)).collect();
        Alignment { rows: vec![new_pattern], columns }
    }

    /// Assembles an alignment from explicit parts. No legality check here;
    /// run [`validate_alignment`] when the parts come from outside.
    pub fn from_parts(rows: Vec<Arc<Pattern>>, columns: Vec<Column>) -> Alignment {
        Alignment { rows, columns }
    }

    pub fn rows(&self) -> &[Arc<Pattern>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn new_pattern(&self) -> &Arc<Pattern> {
        &self.rows[0]
    }

    pub fn is_degenerate(&self) -> bool {
        self.rows.len() == 1
    }

    /// Token shown by a column (all matched symbols share it).
    pub fn column_token(&self, col: usize) -> &str {
        let (row, pos) = self.columns[col].entries()[0];
        &self.rows[row].tokens[pos]
    }

    /// Symbol class of one column entry within its own row.
    pub fn entry_class(&self, row: usize, pos: usize) -> SymbolClass {
        self.rows[row].class_of(pos)
    }

    /// True when the column holds at least one symbol that is not an
    /// identification symbol (a New symbol or an Old contents symbol).
    pub fn column_has_non_id(&self, col: usize) -> bool {
        self.columns[col]
            .entries()
            .iter()
            .any(|&(r, p)| r == 0 || self.rows[r].class_of(p) == SymbolClass::Contents)
    }

    /// Number of matched columns supported by at least one non-identification
    /// symbol. Used as a structural tie-break: these columns carry actual
    /// content agreement rather than id-to-id coincidence.
    pub fn support_column_count(&self) -> usize {
        (0..self.columns.len())
            .filter(|&c| self.columns[c].is_matched() && self.column_has_non_id(c))
            .count()
    }

    /// Number of unmatched contents symbols in Old rows (pending inferences).
    pub fn dangling_contents_count(&self) -> usize {
        self.columns
            .iter()
            .filter(|c| !c.is_matched())
            .filter(|c| {
                let (r, p) = c.entries()[0];
                r > 0 && self.rows[r].class_of(p) == SymbolClass::Contents
            })
            .count()
    }

    /// Column index occupied by `(row, pos)`, if any.
    pub fn column_of(&self, row: usize, pos: usize) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.position_of(row) == Some(pos))
    }

    /// A canonical structural key: identical for alignments that differ only
    /// in row order or construction history. Rows are relabelled as
    /// (pattern id, occurrence) with occurrences numbered by first occupied
    /// column.
    pub fn canonical_key(&self) -> Vec<u8> {
        // first occupied column per row
        let mut first_col: Vec<usize> = vec![usize::MAX; self.rows.len()];
        for (ci, col) in self.columns.iter().enumerate() {
            for &(r, _) in col.entries() {
                if first_col[r] == usize::MAX {
                    first_col[r] = ci;
                }
            }
        }
        // canonical row labels: row 0 fixed, others ordered by (pattern_id, first_col)
        let mut order: Vec<usize> = (1..self.rows.len()).collect();
        order.sort_by(|&a, &b| {
            self.rows[a]
                .pattern_id
                .cmp(&self.rows[b].pattern_id)
                .then(first_col[a].cmp(&first_col[b]))
        });
        let mut label: BTreeMap<usize, (String, usize)> = BTreeMap::new();
        label.insert(0, ("\u{0}new".to_owned(), 0));
        let mut occ: BTreeMap<&str, usize> = BTreeMap::new();
        for &r in &order {
            let pid = self.rows[r].pattern_id.as_str();
            let k = occ.entry(pid).or_insert(0);
            label.insert(r, (pid.to_owned(), *k));
            *k += 1;
        }
        let mut key = Vec::new();
        for col in &self.columns {
            let mut entries: Vec<(&(String, usize), usize)> =
                col.entries().iter().map(|&(r, p)| (&label[&r], p)).collect();
            entries.sort();
            key.push(b'[');
            for ((pid, occ), pos) in entries {
                key.extend_from_slice(pid.as_bytes());
                key.push(b'#');
                key.extend_from_slice(occ.to_string().as_bytes());
                key.push(b'@');
                key.extend_from_slice(pos.to_string().as_bytes());
                key.push(b',');
            }
            key.push(b']');
        }
        key
    }

    /// Sorted list of row pattern ids (excluding the New row).
    pub fn row_id_multiset(&self) -> Vec<String> {
        let mut ids: Vec<String> =
            self.rows[1..].iter().map(|p| p.pattern_id.clone()).collect();
        ids.sort();
        ids
    }
}

/// Checks every alignment invariant and reports all violations found.
/// An empty report means the alignment is legal.
pub fn validate_alignment(a: &Alignment) -> Vec<Violation> {
    let mut out = Vec::new();
    if a.rows.is_empty() {
        return out;
    }
    if a.rows[0].role != Role::New {
        out.push(Violation::BadRole { row: 0 });
    }
    for (r, p) in a.rows.iter().enumerate().skip(1) {
        if p.role != Role::Old {
            out.push(Violation::BadRole { row: r });
        }
    }

    // column-local checks
    for (ci, col) in a.columns.iter().enumerate() {
        if col.is_empty() {
            out.push(Violation::EmptyColumn { column: ci });
            continue;
        }
        let mut seen_rows: Vec<usize> = Vec::new();
        let mut tokens: Vec<&str> = Vec::new();
        for &(r, p) in col.entries() {
            if r >= a.rows.len() || p >= a.rows[r].len() {
                out.push(Violation::OutOfRange { column: ci, row: r.min(a.rows.len() - 1) });
                continue;
            }
            if seen_rows.contains(&r) {
                out.push(Violation::DuplicateRow { column: ci, row: r });
            }
            seen_rows.push(r);
            tokens.push(&a.rows[r].tokens[p]);
        }
        if col.is_matched() && tokens.windows(2).any(|w| w[0] != w[1]) {
            out.push(Violation::MixedColumn { column: ci });
        }
    }

    // per-row coverage and strict monotonicity across the column order
    for (r, p) in a.rows.iter().enumerate() {
        let mut covered: Vec<usize> = vec![0; p.len()];
        let mut last: Option<usize> = None;
        for (ci, col) in a.columns.iter().enumerate() {
            if let Some(pos) = col.position_of(r) {
                if pos < p.len() {
                    covered[pos] += 1;
                }
                if let Some(prev) = last {
                    if pos <= prev {
                        out.push(Violation::Crossing { row: r, column: ci });
                    }
                }
                last = Some(pos);
            }
        }
        for (pos, n) in covered.iter().enumerate() {
            match n {
                0 => out.push(Violation::MissingSymbol { row: r, pos }),
                1 => {}
                _ => out.push(Violation::DuplicateSymbol { row: r, pos }),
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{parse_pattern_line, Provenance};

    fn new_pat(text: &str) -> Arc<Pattern> {
        Pattern::new_from_text("n", text).unwrap().shared()
    }

    fn old_pat(line: &str, id: &str) -> Arc<Pattern> {
        parse_pattern_line(line, Role::Old, id).unwrap().shared()
    }

    fn two_row_the() -> Alignment {
        // New "t h e" against "D 8 : t h e #D", letters matched
        let n = new_pat("t h e");
        let d = old_pat("D 8 : t h e #D", "d8");
        let mut cols = vec![Column::singleton(1, 0), Column::singleton(1, 1)];
        for i in 0..3 {
            let mut c = Column::singleton(0, i);
            c.insert(1, i + 2);
            cols.push(c);
        }
        cols.push(Column::singleton(1, 5));
        Alignment::from_parts(vec![n, d], cols)
    }

    #[test]
    fn degenerate_alignment_is_legal() {
        let a = Alignment::degenerate(new_pat("t h e"));
        assert!(validate_alignment(&a).is_empty());
    }

    #[test]
    fn two_row_alignment_is_legal() {
        assert!(validate_alignment(&two_row_the()).is_empty());
    }

    #[test]
    fn crossing_is_reported() {
        let n = new_pat("a b");
        let o = old_pat("x : a b", "o");
        // columns pair (0,0)-(1,2) then (0,1)-(1,1): row 1 goes backwards
        let mut c0 = Column::singleton(0, 0);
        c0.insert(1, 2);
        let mut c1 = Column::singleton(0, 1);
        c1.insert(1, 1);
        let cols = vec![Column::singleton(1, 0), c0, c1];
        let a = Alignment::from_parts(vec![n, o], cols);
        let report = validate_alignment(&a);
        assert!(report.iter().any(|v| matches!(v, Violation::Crossing { .. })));
        assert!(report.iter().any(|v| matches!(v, Violation::MixedColumn { .. })));
        // every column index mentioned exists
        for v in &report {
            if let Violation::Crossing { column, .. } | Violation::MixedColumn { column } = v {
                assert!(*column < a.columns().len());
            }
        }
    }

    #[test]
    fn mixed_column_is_reported() {
        let n = new_pat("a");
        let o = Pattern::new("o", vec!["b".into()], 0, 1, Role::Old, Provenance::User)
            .unwrap()
            .shared();
        let mut c = Column::singleton(0, 0);
        c.insert(1, 0);
        let a = Alignment::from_parts(vec![n, o], vec![c]);
        let report = validate_alignment(&a);
        assert_eq!(report, vec![Violation::MixedColumn { column: 0 }]);
    }

    #[test]
    fn missing_and_duplicate_symbols_are_reported() {
        let n = new_pat("a b");
        let a = Alignment::from_parts(vec![n.clone()], vec![Column::singleton(0, 0)]);
        assert!(validate_alignment(&a)
            .iter()
            .any(|v| matches!(v, Violation::MissingSymbol { row: 0, pos: 1 })));

        let a = Alignment::from_parts(
            vec![n],
            vec![Column::singleton(0, 0), Column::singleton(0, 0), Column::singleton(0, 1)],
        );
        assert!(validate_alignment(&a)
            .iter()
            .any(|v| matches!(v, Violation::DuplicateSymbol { row: 0, pos: 0 })));
    }

    #[test]
    fn disconnected_multi_row_alignment_is_legal() {
        // all-singleton alignments arise in multiple-alignment mode when
        // sequences share no tokens; they are structurally sound
        let n = new_pat("a");
        let o = old_pat("x : b", "o");
        let cols = vec![
            Column::singleton(0, 0),
            Column::singleton(1, 0),
            Column::singleton(1, 1),
        ];
        let a = Alignment::from_parts(vec![n, o], cols);
        assert!(validate_alignment(&a).is_empty());
    }

    #[test]
    fn canonical_key_ignores_row_order() {
        let a = two_row_the();
        // same structure with the Old row re-labelled as row 1 either way:
        // swap construction order of columns only
        let b = a.clone();
        assert_eq!(a.canonical_key(), b.canonical_key());
    }
}
