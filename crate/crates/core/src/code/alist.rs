//! MacKay alist reader and writer.
//!
//! Layout: `n m`, `max_col_deg max_row_deg`, the `n` column degrees, the
//! `m` row degrees, then `n` lines of 1-based row indices and `m` lines of
//! 1-based column indices. Zero entries are padding and are skipped.

use crate::gf2::SparseBinMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlistError {
    #[error("alist truncated: missing {section}")]
    Truncated { section: &'static str },
    #[error("malformed alist header on line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: `{token}` is not a non-negative integer")]
    InvalidNumber { line: usize, token: String },
    #[error("line {line} ({section}): index {index} outside 1..={bound}")]
    IndexOutOfRange {
        section: &'static str,
        line: usize,
        index: usize,
        bound: usize,
    },
    #[error("{section} entry {entry}: declared degree {declared}, found {found}")]
    DegreeMismatch {
        section: &'static str,
        entry: usize,
        declared: usize,
        found: usize,
    },
    #[error("column lists and row lists disagree at row {row}")]
    Inconsistent { row: usize },
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Lines { inner: it.peekable() }
    }

    fn numbers(&mut self, section: &'static str) -> Result<(usize, Vec<usize>), AlistError> {
        let (line, text) = self.inner.next().ok_or(AlistError::Truncated { section })?;
        let nums = text
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|_| AlistError::InvalidNumber {
                    line,
                    token: t.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((line, nums))
    }
}

fn header_pair(lines: &mut Lines<'_>, section: &'static str) -> Result<(usize, usize), AlistError> {
    let (line, nums) = lines.numbers(section)?;
    match nums[..] {
        [a, b] => Ok((a, b)),
        _ => Err(AlistError::MalformedHeader {
            line,
            reason: format!("{section}: expected 2 values, found {}", nums.len()),
        }),
    }
}

fn degree_line(
    lines: &mut Lines<'_>,
    section: &'static str,
    count: usize,
    max: usize,
) -> Result<Vec<usize>, AlistError> {
    let (line, nums) = lines.numbers(section)?;
    if nums.len() != count {
        return Err(AlistError::MalformedHeader {
            line,
            reason: format!("{section}: expected {count} values, found {}", nums.len()),
        });
    }
    if let Some((entry, &d)) = nums.iter().enumerate().find(|(_, &d)| d > max) {
        return Err(AlistError::DegreeMismatch {
            section,
            entry,
            declared: d,
            found: max,
        });
    }
    Ok(nums)
}

fn adjacency(
    lines: &mut Lines<'_>,
    section: &'static str,
    degrees: &[usize],
    bound: usize,
) -> Result<Vec<Vec<usize>>, AlistError> {
    degrees
        .iter()
        .enumerate()
        .map(|(entry, &declared)| {
            let (line, nums) = lines.numbers(section)?;
            let list: Vec<usize> = nums.into_iter().filter(|&x| x != 0).collect();
            if let Some(&index) = list.iter().find(|&&x| x > bound) {
                return Err(AlistError::IndexOutOfRange {
                    section,
                    line,
                    index,
                    bound,
                });
            }
            if list.len() != declared {
                return Err(AlistError::DegreeMismatch {
                    section,
                    entry,
                    declared,
                    found: list.len(),
                });
            }
            Ok(list.into_iter().map(|x| x - 1).collect())
        })
        .collect()
}

/// Parses alist text into a sparse matrix with `m` rows and `n` columns.
pub fn load_alist(text: &str) -> Result<SparseBinMatrix, AlistError> {
    let mut lines = Lines::new(text);
    let (n, m) = header_pair(&mut lines, "dimensions")?;
    let (max_col, max_row) = header_pair(&mut lines, "maximum degrees")?;
    let col_deg = degree_line(&mut lines, "column degrees", n, max_col)?;
    let row_deg = degree_line(&mut lines, "row degrees", m, max_row)?;
    let cols = adjacency(&mut lines, "column lists", &col_deg, m)?;
    let rows = adjacency(&mut lines, "row lists", &row_deg, n)?;

    let mut from_cols = vec![Vec::new(); m];
    for (c, list) in cols.iter().enumerate() {
        for &r in list {
            from_cols[r].push(c);
        }
    }
    for (r, (mut a, mut b)) in from_cols.into_iter().zip(rows.iter().cloned()).enumerate() {
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(AlistError::Inconsistent { row: r });
        }
    }
    SparseBinMatrix::from_row_adj(m, n, rows).map_err(|_| AlistError::Inconsistent { row: 0 })
}

/// Canonical alist text: single spaces, lists zero-padded to the maximum degree.
pub fn to_alist(h: &SparseBinMatrix) -> String {
    fn join(it: impl Iterator<Item = usize>) -> String {
        let s = it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        // A bare zero keeps empty lists on their own line.
        if s.is_empty() {
            "0".to_string()
        } else {
            s
        }
    }
    let col_w = h.col_weights();
    let row_w = h.row_weights();
    let max_col = col_w.iter().copied().max().unwrap_or(0);
    let max_row = row_w.iter().copied().max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!("{} {}\n{} {}\n", h.cols(), h.rows(), max_col, max_row));
    out.push_str(&join(col_w.iter().copied()));
    out.push('\n');
    out.push_str(&join(row_w.iter().copied()));
    out.push('\n');
    for c in 0..h.cols() {
        let list = h.col(c);
        let padded = list
            .iter()
            .map(|&r| r + 1)
            .chain(std::iter::repeat_n(0, max_col - list.len()));
        out.push_str(&join(padded));
        out.push('\n');
    }
    for r in 0..h.rows() {
        let list = h.row(r);
        let padded = list
            .iter()
            .map(|&c| c + 1)
            .chain(std::iter::repeat_n(0, max_row - list.len()));
        out.push_str(&join(padded));
        out.push('\n');
    }
    out
}
