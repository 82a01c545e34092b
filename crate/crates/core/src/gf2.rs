//! Dense and sparse GF(2) matrices.
//!
//! [`BinMatrix`] is bit-packed row-major and holds generator matrices, which
//! are usually dense. [`SparseBinMatrix`] keeps both row and column adjacency
//! lists and holds parity-check matrices.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate entry ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("parity-check matrix has full column rank {rank}; the code has no information bits")]
    NoInformationBits { rank: usize },
}

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Bit-packed dense binary matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct BinMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl std::fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows.min(32) {
            let line: String = (0..self.cols.min(96))
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

impl BinMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BinMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, Gf2Error> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Gf2Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b & 1 == 1);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / WORD] >> (c % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Packed words of row `r`; bits past `cols` are zero.
    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_bits(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c) as u8).collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..(src + 1) * s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s] as &[u64], &mut lo[dst * s..(dst + 1) * s])
        };
        for (d, x) in b.iter_mut().zip(a) {
            *d ^= x;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// Gauss-Jordan elimination visiting columns in `order`.
    ///
    /// Returns `(column, row)` for each pivot; after the call row `i` of the
    /// result holds the pivot found `i`-th and each pivot column is a unit
    /// vector.
    fn eliminate(&mut self, order: impl IntoIterator<Item = usize>) -> Vec<(usize, usize)> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in order {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(p, next);
            for r in 0..self.rows {
                if r != next && self.get(r, c) {
                    self.xor_row_into(next, r);
                }
            }
            pivots.push((c, next));
            next += 1;
        }
        pivots
    }

    /// Row vector times matrix: `v * self`, length `cols`.
    pub fn vec_mul(&self, v: &[u8]) -> Result<Vec<u8>, Gf2Error> {
        if v.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut acc = vec![0u64; self.stride];
        for (r, &b) in v.iter().enumerate() {
            if b & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row_words(r)) {
                    *a ^= w;
                }
            }
        }
        Ok(unpack(&acc, self.cols))
    }

    /// Matrix times column vector: `self * v`, length `rows`.
    pub fn mul_vec(&self, v: &[u8]) -> Result<Vec<u8>, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let packed = pack(v);
        Ok((0..self.rows)
            .map(|r| {
                let ones: u32 = self
                    .row_words(r)
                    .iter()
                    .zip(&packed)
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                (ones & 1) as u8
            })
            .collect())
    }

    pub fn transpose(&self) -> BinMatrix {
        let mut t = BinMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> BinMatrix {
        let mut m = BinMatrix::zeros(self.rows, end - start);
        for r in 0..self.rows {
            for c in start..end {
                if self.get(r, c) {
                    m.set(r, c - start, true);
                }
            }
        }
        m
    }

    pub fn to_sparse(&self) -> SparseBinMatrix {
        let row_adj = (0..self.rows)
            .map(|r| (0..self.cols).filter(|&c| self.get(r, c)).collect())
            .collect();
        SparseBinMatrix::from_row_adj(self.rows, self.cols, row_adj).expect("dense rows are sorted and in range")
    }
}

/// Packs 0/1 values into little-endian words.
pub fn pack(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; words_for(bits.len())];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[i / WORD] |= 1 << (i % WORD);
        }
    }
    out
}

pub fn unpack(words: &[u64], len: usize) -> Vec<u8> {
    (0..len).map(|i| (words[i / WORD] >> (i % WORD) & 1) as u8).collect()
}

/// GF(2) rank by Gaussian elimination.
pub fn rank(m: &BinMatrix) -> usize {
    let mut work = m.clone();
    work.eliminate(0..m.cols).len()
}

/// Sparse binary matrix holding both adjacency directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinMatrix {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
}

impl SparseBinMatrix {
    /// Builds from per-row column lists. Lists are sorted here; duplicates and
    /// out-of-range indices are rejected.
    pub fn from_row_adj(rows: usize, cols: usize, mut row_adj: Vec<Vec<usize>>) -> Result<Self, Gf2Error> {
        if row_adj.len() != rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: rows,
                got: row_adj.len(),
            });
        }
        let mut col_adj = vec![Vec::new(); cols];
        for (r, list) in row_adj.iter_mut().enumerate() {
            list.sort_unstable();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Gf2Error::DuplicateEntry { row: r, col: w[0] });
                }
            }
            for &c in list.iter() {
                if c >= cols {
                    return Err(Gf2Error::OutOfRange {
                        row: r,
                        col: c,
                        rows,
                        cols,
                    });
                }
                col_adj[c].push(r);
            }
        }
        Ok(SparseBinMatrix {
            rows,
            cols,
            row_adj,
            col_adj,
        })
    }

    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, Gf2Error> {
        let mut row_adj = vec![Vec::new(); rows];
        for (r, c) in entries {
            if r >= rows {
                return Err(Gf2Error::OutOfRange {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            row_adj[r].push(c);
        }
        Self::from_row_adj(rows, cols, row_adj)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_adj[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_adj[c]
    }

    pub fn nnz(&self) -> usize {
        self.row_adj.iter().map(Vec::len).sum()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.row_adj.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        self.col_adj.iter().map(Vec::len).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_adj[r].binary_search(&c).is_ok()
    }

    pub fn to_dense(&self) -> BinMatrix {
        let mut d = BinMatrix::zeros(self.rows, self.cols);
        for (r, list) in self.row_adj.iter().enumerate() {
            for &c in list {
                d.set(r, c, true);
            }
        }
        d
    }

    pub fn transpose(&self) -> SparseBinMatrix {
        SparseBinMatrix {
            rows: self.cols,
            cols: self.rows,
            row_adj: self.col_adj.clone(),
            col_adj: self.row_adj.clone(),
        }
    }

    /// New matrix whose column `j` is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> SparseBinMatrix {
        assert_eq!(perm.len(), self.cols);
        let inv = invert_permutation(perm);
        let row_adj = self
            .row_adj
            .iter()
            .map(|list| list.iter().map(|&c| inv[c]).collect())
            .collect();
        SparseBinMatrix::from_row_adj(self.rows, self.cols, row_adj).expect("permutation preserves structure")
    }

    /// Matrix times column vector over GF(2).
    pub fn mul_vec(&self, v: &[u8]) -> Result<Vec<u8>, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(self
            .row_adj
            .iter()
            .map(|list| list.iter().fold(0u8, |acc, &c| acc ^ (v[c] & 1)))
            .collect())
    }

    /// Row vector times matrix over GF(2).
    pub fn vec_mul(&self, v: &[u8]) -> Result<Vec<u8>, Gf2Error> {
        self.transpose().mul_vec(v)
    }

    /// True iff `self * bits^T = 0`. Panics on length mismatch.
    pub fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        assert_eq!(bits.len(), self.cols);
        self.row_adj
            .iter()
            .all(|list| list.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)) == 0)
    }
}

/// `m * v` over GF(2).
pub fn mat_vec_mul_gf2(m: &SparseBinMatrix, v: &[u8]) -> Result<Vec<u8>, Gf2Error> {
    m.mul_vec(v)
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p] = j;
    }
    inv
}

/// Output of [`systematic_form`].
#[derive(Debug, Clone)]
pub struct SystematicForm {
    /// `perm[j]` is the column of `h` placed at position `j`; the first
    /// `k` positions are systematic, the rest parity.
    pub perm: Vec<usize>,
    /// `[I_k | G_p]` in permuted column order.
    pub g_sys: BinMatrix,
    pub h_perm: SparseBinMatrix,
}

impl SystematicForm {
    pub fn k(&self) -> usize {
        self.g_sys.rows()
    }
}

/// Derives a systematic generator for the code with parity-check matrix `h`.
///
/// Redundant rows are tolerated. If the trailing `rank` columns of `h` are
/// independent the permutation is the identity; otherwise pivots are taken
/// at the lowest eligible column index and moved to the parity block.
pub fn systematic_form(h: &SparseBinMatrix) -> Result<SystematicForm, Gf2Error> {
    let n = h.cols();
    let dense = h.to_dense();
    let r = rank(&dense);
    let k = n - r;
    if k == 0 {
        return Err(Gf2Error::NoInformationBits { rank: r });
    }

    let mut work = dense.clone();
    let mut pivots = work.eliminate((n - r..n).chain(0..n - r));
    if pivots.iter().any(|&(c, _)| c < n - r) {
        work = dense;
        pivots = work.eliminate(0..n);
    }
    debug_assert_eq!(pivots.len(), r);
    pivots.sort_unstable();

    let mut is_pivot = vec![false; n];
    for &(c, _) in &pivots {
        is_pivot[c] = true;
    }
    let systematic: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let perm: Vec<usize> = systematic
        .iter()
        .copied()
        .chain(pivots.iter().map(|&(c, _)| c))
        .collect();

    // Reduced row for pivot column p_j reads c[p_j] = sum_i row[s_i] c[s_i].
    let mut g_sys = BinMatrix::zeros(k, n);
    for (i, &s) in systematic.iter().enumerate() {
        g_sys.set(i, i, true);
        for (j, &(_, row)) in pivots.iter().enumerate() {
            if work.get(row, s) {
                g_sys.set(i, k + j, true);
            }
        }
    }

    Ok(SystematicForm {
        h_perm: h.permute_columns(&perm),
        perm,
        g_sys,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_gp() -> Vec<Vec<u8>> {
        vec![
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![1, 1, 0],
            vec![0, 1, 1],
        ]
    }

    fn toy_h() -> SparseBinMatrix {
        let gp = toy_gp();
        let entries = (0..3).flat_map(|j| {
            let gp = &gp;
            (0..6)
                .filter(move |&i| gp[i][j] == 1)
                .map(move |i| (j, i))
                .chain(std::iter::once((j, 6 + j)))
        });
        SparseBinMatrix::from_entries(3, 9, entries).unwrap()
    }

    fn toy_g() -> BinMatrix {
        let gp = toy_gp();
        let rows: Vec<Vec<u8>> = (0..6)
            .map(|i| {
                let mut r = vec![0u8; 9];
                r[i] = 1;
                r[6..].copy_from_slice(&gp[i]);
                r
            })
            .collect();
        BinMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(rank(&BinMatrix::identity(3)), 3);
        assert_eq!(rank(&BinMatrix::zeros(4, 6)), 0);
        assert_eq!(rank(&toy_h().to_dense()), 3);
    }

    #[test]
    fn rank_brute_force_agrees() {
        // Rank = log2 of the number of distinct row combinations.
        let mut state = 0x1234_5678_9abc_def0u64;
        for _ in 0..200 {
            let rows = 1 + (state % 5) as usize;
            let cols = 1 + (state / 7 % 7) as usize;
            let mut m = BinMatrix::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    m.set(r, c, state >> 62 & 1 == 1);
                }
            }
            let mut span = std::collections::HashSet::new();
            for mask in 0u32..1 << rows {
                let v: Vec<u8> = (0..rows).map(|r| (mask >> r & 1) as u8).collect();
                span.insert(m.vec_mul(&v).unwrap());
            }
            assert_eq!(1usize << rank(&m), span.len());
        }
    }

    #[test]
    fn toy_systematic_form_is_identity() {
        let sf = systematic_form(&toy_h()).unwrap();
        assert_eq!(sf.perm, (0..9).collect::<Vec<_>>());
        assert_eq!(sf.g_sys, toy_g());
    }

    #[test]
    fn leading_identity_swaps_blocks() {
        // H = [I_2 | A] with the trailing two columns of A dependent.
        let a = [[1u8, 1, 1], [0, 1, 1]];
        let mut entries = vec![(0, 0), (1, 1)];
        for (r, row) in a.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                if b == 1 {
                    entries.push((r, 2 + c));
                }
            }
        }
        let h = SparseBinMatrix::from_entries(2, 5, entries).unwrap();
        let sf = systematic_form(&h).unwrap();
        assert_eq!(sf.perm, vec![2, 3, 4, 0, 1]);
        let expected = BinMatrix::from_rows(&[vec![1, 0, 0, 1, 0], vec![0, 1, 0, 1, 1], vec![0, 0, 1, 1, 1]]).unwrap();
        assert_eq!(sf.g_sys, expected);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let h = toy_h();
        let mut rows: Vec<Vec<usize>> = (0..3).map(|r| h.row(r).to_vec()).collect();
        let mut sum: Vec<usize> = rows[0].clone();
        sum.retain(|c| !rows[1].contains(c));
        sum.extend(rows[1].iter().filter(|c| !rows[0].contains(c)));
        rows.push(sum);
        let h4 = SparseBinMatrix::from_row_adj(4, 9, rows).unwrap();
        let sf = systematic_form(&h4).unwrap();
        assert_eq!(sf.k(), 6);
        assert_eq!(sf.g_sys, toy_g());
    }

    #[test]
    fn full_rank_square_is_rejected() {
        let h = BinMatrix::identity(4).to_sparse();
        assert_eq!(
            systematic_form(&h).unwrap_err(),
            Gf2Error::NoInformationBits { rank: 4 }
        );
    }

    #[test]
    fn vec_mul_toy() {
        let c = toy_g().vec_mul(&[0, 0, 1, 0, 1, 0]).unwrap();
        assert_eq!(c, vec![0, 0, 1, 0, 1, 0, 0, 0, 0]);
        let c = toy_g().to_sparse().vec_mul(&[0, 0, 1, 0, 1, 0]).unwrap();
        assert_eq!(c, vec![0, 0, 1, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn mat_vec_trivial_cases() {
        let h = toy_h();
        assert_eq!(mat_vec_mul_gf2(&h, &[0; 9]).unwrap(), vec![0; 3]);
        let id = BinMatrix::identity(5).to_sparse();
        let v = vec![1, 0, 1, 1, 0];
        assert_eq!(mat_vec_mul_gf2(&id, &v).unwrap(), v);
        assert_eq!(
            mat_vec_mul_gf2(&h, &[0; 4]).unwrap_err(),
            Gf2Error::DimensionMismatch { expected: 9, got: 4 }
        );
    }

    #[test]
    fn sparse_rejects_bad_input() {
        assert!(matches!(
            SparseBinMatrix::from_row_adj(1, 3, vec![vec![0, 3]]),
            Err(Gf2Error::OutOfRange { .. })
        ));
        assert!(matches!(
            SparseBinMatrix::from_row_adj(1, 3, vec![vec![1, 1]]),
            Err(Gf2Error::DuplicateEntry { .. })
        ));
    }

    #[test]
    fn dense_mul_vec_matches_sparse() {
        let h = toy_h();
        let v = [1u8, 0, 1, 1, 0, 0, 1, 0, 1];
        assert_eq!(h.to_dense().mul_vec(&v).unwrap(), h.mul_vec(&v).unwrap());
    }
}
