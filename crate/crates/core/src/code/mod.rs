//! LDPC codes with a systematic generator, puncturing and shaping-bit
//! placement.
//!
//! All codeword vectors crossing this API are in the original column order of
//! the parity-check matrix. The systematic order used by the generator is an
//! internal detail reached through [`LdpcCode::systematic_column`].

pub mod alist;
pub mod qc;

use crate::gf2::{self, invert_permutation, BinMatrix, Gf2Error, SparseBinMatrix};
use std::collections::BTreeSet;
use thiserror::Error;

pub use alist::{load_alist, to_alist, AlistError};
pub use qc::{design_qc, lift_base_matrix, BaseMatrix, BaseMatrixError, QcDesign};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodeError {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("puncture position {pos} outside codeword of length {n}")]
    PunctureOutOfRange { pos: usize, n: usize },
    #[error("{ell} shaping bits requested but the code has only {k} systematic bits")]
    TooManyShapingBits { ell: usize, k: usize },
    #[error("shaping position {pos} is not a systematic index below {k}")]
    ShapingOutOfRange { pos: usize, k: usize },
    #[error("shaping position {0} listed twice")]
    DuplicateShaping(usize),
    #[error("target zero-probability {0} must lie strictly between 0 and 1")]
    TargetProbability(f64),
    #[error("{positions} shaping positions but {offsets} offset modes")]
    OffsetCount { positions: usize, offsets: usize },
}

/// Binary LDPC code together with its systematic encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: SparseBinMatrix,
    g_sys: BinMatrix,
    /// Columns `k..n` of `g_sys`, kept packed for encoding.
    parity_part: BinMatrix,
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
    punctured: BTreeSet<usize>,
}

impl LdpcCode {
    pub fn build(h: SparseBinMatrix, puncture_set: impl IntoIterator<Item = usize>) -> Result<Self, CodeError> {
        let n = h.cols();
        let punctured: BTreeSet<usize> = puncture_set.into_iter().collect();
        if let Some(&pos) = punctured.iter().find(|&&p| p >= n) {
            return Err(CodeError::PunctureOutOfRange { pos, n });
        }
        let sf = gf2::systematic_form(&h)?;
        let k = sf.k();
        Ok(LdpcCode {
            parity_part: sf.g_sys.columns(k, n),
            perm_inv: invert_permutation(&sf.perm),
            perm: sf.perm,
            g_sys: sf.g_sys,
            h,
            punctured,
        })
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn k(&self) -> usize {
        self.g_sys.rows()
    }

    /// Parity bits per codeword, `n - k`.
    pub fn m(&self) -> usize {
        self.n() - self.k()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn h(&self) -> &SparseBinMatrix {
        &self.h
    }

    /// `[I_k | G_p]` in systematic column order.
    pub fn g_sys(&self) -> &BinMatrix {
        &self.g_sys
    }

    /// `G_p`, the `k x (n - k)` parity part of the generator.
    pub fn parity_part(&self) -> &BinMatrix {
        &self.parity_part
    }

    /// `perm[j]` is the original column at systematic-order position `j`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn puncture_set(&self) -> &BTreeSet<usize> {
        &self.punctured
    }

    pub fn is_punctured(&self, pos: usize) -> bool {
        self.punctured.contains(&pos)
    }

    /// Original column of systematic bit `i`.
    pub fn systematic_column(&self, i: usize) -> usize {
        self.perm[i]
    }

    /// Original column of parity bit `j`.
    pub fn parity_column(&self, j: usize) -> usize {
        self.perm[self.k() + j]
    }

    /// Systematic-order position of original column `col`.
    pub fn order_of(&self, col: usize) -> usize {
        self.perm_inv[col]
    }

    /// `u * G_p`.
    pub fn parity_bits(&self, u: &[u8]) -> Result<Vec<u8>, CodeError> {
        Ok(self.parity_part.vec_mul(u)?)
    }

    /// `c = u * G_sys`, returned in original column order.
    pub fn encode_systematic(&self, u: &[u8]) -> Result<Vec<u8>, CodeError> {
        let parity = self.parity_bits(u)?;
        Ok(self.assemble(u, &parity))
    }

    /// Places systematic and parity bits at their original columns.
    pub fn assemble(&self, u: &[u8], parity: &[u8]) -> Vec<u8> {
        let mut c = vec![0u8; self.n()];
        for (j, &b) in u.iter().chain(parity).enumerate() {
            c[self.perm[j]] = b;
        }
        c
    }

    /// Systematic bits of a codeword given in original order.
    pub fn extract_systematic(&self, c: &[u8]) -> Vec<u8> {
        (0..self.k()).map(|i| c[self.perm[i]]).collect()
    }

    pub fn is_codeword(&self, c: &[u8]) -> bool {
        c.len() == self.n() && self.h.syndrome_is_zero(c)
    }

    pub fn overall_rate(&self, spec: &ShapingSpec, dm_rate: f64) -> f64 {
        overall_rate(self.n(), self.k(), spec.ell(), dm_rate)
    }
}

/// `R = dm_rate * (k_c - ell) / n_c`.
pub fn overall_rate(n_c: usize, k_c: usize, ell: usize, dm_rate: f64) -> f64 {
    dm_rate * (k_c - ell) as f64 / n_c as f64
}

/// How the decimation offset is applied to one shaping bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetMode {
    /// Adds one prior multiple, biasing the shaping bit itself toward zero.
    WithOffset,
    /// No offset; used for bits that are never transmitted.
    ZeroOffset,
}

/// Which systematic bits are computed by the shaping encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapingSpec {
    positions: Vec<usize>,
    offsets: Vec<OffsetMode>,
    target_p0: f64,
}

impl ShapingSpec {
    /// Explicit placement. `positions` are systematic-order indices below `k`.
    pub fn new(
        code: &LdpcCode,
        positions: Vec<usize>,
        offsets: Vec<OffsetMode>,
        target_p0: f64,
    ) -> Result<Self, CodeError> {
        let k = code.k();
        if !(target_p0 > 0.0 && target_p0 < 1.0) {
            return Err(CodeError::TargetProbability(target_p0));
        }
        if positions.len() > k {
            return Err(CodeError::TooManyShapingBits {
                ell: positions.len(),
                k,
            });
        }
        if offsets.len() != positions.len() {
            return Err(CodeError::OffsetCount {
                positions: positions.len(),
                offsets: offsets.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for &p in &positions {
            if p >= k {
                return Err(CodeError::ShapingOutOfRange { pos: p, k });
            }
            if !seen.insert(p) {
                return Err(CodeError::DuplicateShaping(p));
            }
        }
        Ok(ShapingSpec {
            positions,
            offsets,
            target_p0,
        })
    }

    /// Explicit positions with the offset applied everywhere.
    pub fn with_positions(code: &LdpcCode, positions: Vec<usize>, target_p0: f64) -> Result<Self, CodeError> {
        let offsets = vec![OffsetMode::WithOffset; positions.len()];
        Self::new(code, positions, offsets, target_p0)
    }

    /// Default placement for `ell` shaping bits.
    ///
    /// Punctured systematic bits are used first, lowest index first, with
    /// [`OffsetMode::ZeroOffset`]. Any remaining shaping bits take the last
    /// free systematic positions with [`OffsetMode::WithOffset`].
    pub fn default_placement(code: &LdpcCode, ell: usize, target_p0: f64) -> Result<Self, CodeError> {
        let k = code.k();
        if ell > k {
            return Err(CodeError::TooManyShapingBits { ell, k });
        }
        let mut positions: Vec<usize> = (0..k)
            .filter(|&i| code.is_punctured(code.systematic_column(i)))
            .take(ell)
            .collect();
        let mut offsets = vec![OffsetMode::ZeroOffset; positions.len()];
        let taken: BTreeSet<usize> = positions.iter().copied().collect();
        let mut tail: Vec<usize> = (0..k)
            .rev()
            .filter(|i| !taken.contains(i))
            .take(ell - positions.len())
            .collect();
        tail.reverse();
        offsets.extend(std::iter::repeat_n(OffsetMode::WithOffset, tail.len()));
        positions.extend(tail);
        Self::new(code, positions, offsets, target_p0)
    }

    pub fn ell(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn offsets(&self) -> &[OffsetMode] {
        &self.offsets
    }

    pub fn target_p0(&self) -> f64 {
        self.target_p0
    }

    /// `ln(p0 / (1 - p0))`, the parity-bit prior driving the encoder.
    pub fn prior_llr(&self) -> f64 {
        (self.target_p0 / (1.0 - self.target_p0)).ln()
    }

    /// Systematic positions that carry message bits, ascending.
    pub fn message_positions(&self, k: usize) -> Vec<usize> {
        let shaping: BTreeSet<usize> = self.positions.iter().copied().collect();
        (0..k).filter(|i| !shaping.contains(i)).collect()
    }

    pub fn replace_offsets(&mut self, mode: OffsetMode) {
        self.offsets.iter_mut().for_each(|o| *o = mode);
    }
}
