//! ASCII rendering of alignments in the style of classic multiple-alignment
//! figures: one text line per row, connector lines between adjacent rows,
//! and `|` match lines that pass through intermediate rows.

use crate::alignment::{validate_alignment, Alignment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    /// Wrap into sequential panels beyond this width (minimum 20).
    pub max_width: usize,
    /// Put the row number at both ends of each symbol line.
    pub show_row_numbers: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { max_width: 120, show_row_numbers: true }
    }
}

struct Cell {
    width: usize,
}

/// Renders a legal alignment to text.
///
/// Each column is left-aligned and padded to its widest symbol plus one
/// space. In the connector line between two rendered rows, a `|` sits under
/// the first character of the column's symbol wherever a match line crosses
/// that boundary; rows a match line passes through show `|` in their own
/// symbol line. Wrapping splits the columns into sequential panels.
pub fn render_alignment(a: &Alignment, opts: &RenderOptions) -> Result<String> {
    let report = validate_alignment(a);
    if !report.is_empty() {
        return Err(Error::IllegalAlignment(report[0].to_string()));
    }
    let max_width = opts.max_width.max(20);
    let nrows = a.row_count();
    let ncols = a.columns().len();

    let num_w = if opts.show_row_numbers {
        (nrows - 1).to_string().len()
    } else {
        0
    };
    let left_pad = if opts.show_row_numbers { num_w + 1 } else { 0 };

    let widths: Vec<usize> = (0..ncols)
        .map(|c| a.column_token(c).chars().count() + 1)
        .collect();

    // split columns into panels that fit the width budget
    let budget = max_width.saturating_sub(left_pad + if opts.show_row_numbers { num_w + 1 } else { 0 });
    let mut panels: Vec<(usize, usize)> = Vec::new();
    let mut start = 0usize;
    let mut used = 0usize;
    for (c, w) in widths.iter().enumerate() {
        if c > start && used + w > budget {
            panels.push((start, c));
            start = c;
            used = 0;
        }
        used += w;
    }
    panels.push((start, ncols));

    let mut out = String::new();
    for (pi, &(lo, hi)) in panels.iter().enumerate() {
        if pi > 0 {
            out.push('\n');
        }
        let cells: Vec<Cell> = (lo..hi).map(|c| Cell { width: widths[c] }).collect();
        for r in 0..nrows {
            // symbol line for row r
            let mut line = vec![' '; left_pad];
            for (c, cell) in (lo..hi).zip(&cells) {
                let col = &a.columns()[c];
                let mut text = String::new();
                if let Some(p) = col.position_of(r) {
                    text = a.rows()[r].tokens[p].clone();
                } else if let Some((top, bot)) = col.row_span() {
                    if top < r && r < bot {
                        text.push('|');
                    }
                }
                let mut chars: Vec<char> = text.chars().collect();
                chars.resize(cell.width, ' ');
                line.extend(chars);
            }
            let mut text: String = line.into_iter().collect();
            if opts.show_row_numbers {
                let label = format!("{r:<num_w$}");
                text.replace_range(0..num_w, &label);
                let body = text.trim_end().len();
                text.truncate(body);
                out.push_str(&format!("{text} {r}\n"));
            } else {
                out.push_str(text.trim_end());
                out.push('\n');
            }
            // connector line below, except after the last row
            if r + 1 < nrows {
                let mut line = vec![' '; left_pad];
                for (c, cell) in (lo..hi).zip(&cells) {
                    let col = &a.columns()[c];
                    let mut put = false;
                    if let Some((top, bot)) = col.row_span() {
                        put = top <= r && r < bot;
                    }
                    let mut chars = vec![' '; cell.width];
                    if put {
                        chars[0] = '|';
                    }
                    let _ = cell;
                    line.extend(chars);
                }
                let text: String = line.into_iter().collect();
                let trimmed = text.trim_end();
                out.push_str(trimmed);
                out.push('\n');
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::Column;
    use crate::pattern::{parse_pattern_line, Pattern, Role};
    use std::sync::Arc;

    fn the_alignment() -> Alignment {
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
        Alignment::from_parts(vec![n, d], cols)
    }

    #[test]
    fn two_rows_one_connector_with_three_pipes() {
        let a = the_alignment();
        let text = render_alignment(&a, &RenderOptions::default()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].matches('|').count(), 3);
        // pipes sit under t, h, e and nowhere else
        let sym0 = lines[0];
        for (i, ch) in lines[1].char_indices() {
            if ch == '|' {
                let under: char = sym0.chars().nth(i).unwrap();
                assert!(matches!(under, 't' | 'h' | 'e'));
            }
        }
    }

    #[test]
    fn degenerate_renders_single_line() {
        let n = Pattern::new_from_text("n", "a b c").unwrap().shared();
        let a = Alignment::degenerate(n);
        let text = render_alignment(&a, &RenderOptions::default()).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("a b c"));
    }

    #[test]
    fn row_numbers_flank_symbol_lines() {
        let a = the_alignment();
        let text = render_alignment(&a, &RenderOptions::default()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with('0') && lines[0].ends_with('0'));
        assert!(lines[2].starts_with('1') && lines[2].ends_with('1'));
    }

    #[test]
    fn wrapping_splits_into_panels() {
        let tokens: Vec<String> = (0..40).map(|i| format!("tok{i}")).collect();
        let n = Pattern::new("n", tokens, 0, 1, Role::New, crate::pattern::Provenance::User)
            .unwrap()
            .shared();
        let a = Alignment::degenerate(n);
        let text =
            render_alignment(&a, &RenderOptions { max_width: 40, show_row_numbers: true }).unwrap();
        // several panels separated by blank lines, each within the width
        assert!(text.trim_end().split("\n\n").count() > 1);
        for line in text.lines() {
            assert!(line.chars().count() <= 40, "line too wide: {line:?}");
        }
    }

    #[test]
    fn pass_through_rows_show_pipes() {
        // three rows where row 0 and row 2 match and row 1 is bridged
        let n = Pattern::new_from_text("n", "a").unwrap().shared();
        let o1 = parse_pattern_line("x : q", Role::Old, "o1").unwrap().shared();
        let o2 = parse_pattern_line("y : a", Role::Old, "o2").unwrap().shared();
        let mut c = Column::singleton(0, 0);
        c.insert(2, 1);
        let cols = vec![
            Column::singleton(1, 0),
            Column::singleton(1, 1),
            Column::singleton(2, 0),
            c,
        ];
        let a = Alignment::from_parts(vec![n, o1, o2], cols);
        assert!(validate_alignment(&a).is_empty());
        let text = render_alignment(&a, &RenderOptions::default()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // row 1's own symbol line carries the pass-through pipe
        let a_pos = lines[0].rfind('a').unwrap();
        assert_eq!(&lines[2][a_pos..a_pos + 1], "|");
        assert_eq!(&lines[1][a_pos..a_pos + 1], "|");
        assert_eq!(&lines[3][a_pos..a_pos + 1], "|");
    }
}
