//! Quasi-cyclic base matrices: text format, circulant lifting and a small
//! random designer for desk-scale experiments.

use crate::gf2::{rank, SparseBinMatrix};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaseMatrixError {
    #[error("base matrix header must be `rows cols Z`")]
    Header,
    #[error("`{0}` is not an integer")]
    InvalidNumber(String),
    #[error("expected {expected} shift entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("shift {shift} at ({row}, {col}) outside -1..{z}")]
    ShiftOutOfRange {
        row: usize,
        col: usize,
        shift: i64,
        z: usize,
    },
}

/// Protograph with one circulant shift per cell; `-1` marks an empty block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMatrix {
    rows: usize,
    cols: usize,
    lift_size: usize,
    entries: Vec<i64>,
}

impl BaseMatrix {
    pub fn new(rows: usize, cols: usize, lift_size: usize, entries: Vec<i64>) -> Result<Self, BaseMatrixError> {
        if entries.len() != rows * cols {
            return Err(BaseMatrixError::EntryCount {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if lift_size == 0 {
            return Err(BaseMatrixError::Header);
        }
        for (i, &e) in entries.iter().enumerate() {
            if e < -1 || e >= lift_size as i64 {
                return Err(BaseMatrixError::ShiftOutOfRange {
                    row: i / cols,
                    col: i % cols,
                    shift: e,
                    z: lift_size,
                });
            }
        }
        Ok(BaseMatrix {
            rows,
            cols,
            lift_size,
            entries,
        })
    }

    /// Parses `rows cols Z` followed by `rows * cols` shifts.
    pub fn parse(text: &str) -> Result<Self, BaseMatrixError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or(BaseMatrixError::Header)?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| BaseMatrixError::Header))
            .collect::<Result<_, _>>()?;
        let [rows, cols, z] = dims[..] else {
            return Err(BaseMatrixError::Header);
        };
        let entries = lines
            .flat_map(str::split_whitespace)
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| BaseMatrixError::InvalidNumber(t.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows, cols, z, entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.cols, self.lift_size);
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lift_size(&self) -> usize {
        self.lift_size
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.cols + c]
    }

    /// Expands every shift `e >= 0` into the identity cyclically
    /// right-shifted by `e`, and every `-1` into a zero block.
    pub fn lift(&self) -> SparseBinMatrix {
        let z = self.lift_size;
        let mut row_adj = vec![Vec::new(); self.rows * z];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let e = self.get(r, c);
                if e < 0 {
                    continue;
                }
                for i in 0..z {
                    row_adj[r * z + i].push(c * z + (i + e as usize) % z);
                }
            }
        }
        SparseBinMatrix::from_row_adj(self.rows * z, self.cols * z, row_adj).expect("circulant blocks never collide")
    }
}

pub fn lift_base_matrix(b: &BaseMatrix) -> SparseBinMatrix {
    b.lift()
}

/// Parameters for [`design_qc`].
#[derive(Debug, Clone)]
pub struct QcDesign {
    pub rows: usize,
    pub cols: usize,
    pub lift_size: usize,
    /// Weight pattern cycled over the systematic base columns.
    pub systematic_weights: Vec<usize>,
}

/// Random QC code with a dual-diagonal parity part.
///
/// The first parity column has weight 3 with equal shifts at the top and
/// bottom and shift 0 in the middle; the rest is a zero-shift staircase.
/// Systematic shifts are drawn at random, rejecting any shift that closes a
/// 4-cycle. Designs whose lift does not have full row rank are redrawn.
pub fn design_qc<R: Rng>(d: &QcDesign, rng: &mut R) -> BaseMatrix {
    assert!(d.rows >= 2 && d.cols > d.rows && d.lift_size >= 2);
    assert!(!d.systematic_weights.is_empty());
    let kb = d.cols - d.rows;
    let z = d.lift_size as i64;
    loop {
        let mut e = vec![-1i64; d.rows * d.cols];
        let at = |r: usize, c: usize| r * d.cols + c;
        let top = rng.random_range(1..z);
        e[at(0, kb)] = top;
        e[at(d.rows / 2, kb)] = 0;
        e[at(d.rows - 1, kb)] = top;
        for j in 1..d.rows {
            e[at(j - 1, kb + j)] = 0;
            e[at(j, kb + j)] = 0;
        }

        let mut row_deg: Vec<usize> = (0..d.rows)
            .map(|r| (kb..d.cols).filter(|&c| e[at(r, c)] >= 0).count())
            .collect();
        for c in 0..kb {
            let w = d.systematic_weights[c % d.systematic_weights.len()].min(d.rows);
            let mut order: Vec<usize> = (0..d.rows).collect();
            order.shuffle(rng);
            order.sort_by_key(|&r| row_deg[r]);
            for &r in order.iter().take(w) {
                row_deg[r] += 1;
                let mut shift = rng.random_range(0..z);
                for _ in 0..64 {
                    if !closes_four_cycle(&e, d.rows, d.cols, z, r, c, shift) {
                        break;
                    }
                    shift = rng.random_range(0..z);
                }
                e[at(r, c)] = shift;
            }
        }
        let b = BaseMatrix::new(d.rows, d.cols, d.lift_size, e).expect("valid by construction");
        if rank(&b.lift().to_dense()) == d.rows * d.lift_size {
            return b;
        }
    }
}

fn closes_four_cycle(e: &[i64], rows: usize, cols: usize, z: i64, r: usize, c: usize, shift: i64) -> bool {
    let at = |r: usize, c: usize| e[r * cols + c];
    for r2 in (0..rows).filter(|&r2| r2 != r && at(r2, c) >= 0) {
        for c2 in (0..cols).filter(|&c2| c2 != c && at(r, c2) >= 0 && at(r2, c2) >= 0) {
            let sum = shift - at(r2, c) + at(r2, c2) - at(r, c2);
            if sum.rem_euclid(z) == 0 {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_shift_is_identity() {
        let h = BaseMatrix::new(1, 1, 3, vec![0]).unwrap().lift();
        for i in 0..3 {
            assert_eq!(h.row(i), &[i]);
        }
    }

    #[test]
    fn unit_shift_rotates() {
        let h = BaseMatrix::new(1, 1, 3, vec![1]).unwrap().lift();
        for i in 0..3 {
            assert_eq!(h.row(i), &[(i + 1) % 3]);
        }
    }

    #[test]
    fn two_by_two_row_weights() {
        let h = BaseMatrix::new(2, 2, 2, vec![0, -1, 1, 0]).unwrap().lift();
        assert_eq!((h.rows(), h.cols()), (4, 4));
        assert_eq!(h.row_weights(), vec![1, 1, 2, 2]);
        assert_eq!(h.row(2), &[1, 2]);
    }

    #[test]
    fn lifted_weights_follow_base_counts() {
        let b = BaseMatrix::new(2, 4, 5, vec![1, 2, 0, -1, 0, 3, -1, 0]).unwrap();
        let h = b.lift();
        for r in 0..2 {
            let count = (0..4).filter(|&c| b.get(r, c) >= 0).count();
            assert!(h.row_weights()[r * 5..(r + 1) * 5].iter().all(|&w| w == count));
        }
        for c in 0..4 {
            let count = (0..2).filter(|&r| b.get(r, c) >= 0).count();
            assert!(h.col_weights()[c * 5..(c + 1) * 5].iter().all(|&w| w == count));
        }
    }

    #[test]
    fn text_round_trip_and_errors() {
        let b = BaseMatrix::new(2, 3, 4, vec![0, -1, 3, 2, 1, -1]).unwrap();
        assert_eq!(BaseMatrix::parse(&b.to_text()).unwrap(), b);
        assert_eq!(BaseMatrix::parse("2 2\n0 0 0 0").unwrap_err(), BaseMatrixError::Header);
        assert_eq!(
            BaseMatrix::parse("1 2 4\n0").unwrap_err(),
            BaseMatrixError::EntryCount { expected: 2, found: 1 }
        );
        assert!(matches!(
            BaseMatrix::parse("1 2 4\n0 4").unwrap_err(),
            BaseMatrixError::ShiftOutOfRange { shift: 4, .. }
        ));
        assert!(matches!(
            BaseMatrix::parse("1 2 4\n0 q").unwrap_err(),
            BaseMatrixError::InvalidNumber(_)
        ));
    }

    #[test]
    fn designed_codes_are_full_rank_without_four_cycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = QcDesign {
            rows: 4,
            cols: 12,
            lift_size: 16,
            systematic_weights: vec![3],
        };
        let b = design_qc(&d, &mut rng);
        let h = b.lift();
        assert_eq!(rank(&h.to_dense()), 64);
        // No two rows of the lift share more than one column.
        for r in 0..h.rows() {
            for r2 in r + 1..h.rows() {
                let shared = h.row(r).iter().filter(|c| h.row(r2).contains(c)).count();
                assert!(shared <= 1, "rows {r} and {r2} share {shared} columns");
            }
        }
    }
}
