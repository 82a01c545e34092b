#![allow(dead_code)]

use rand::seq::index::sample;
use rand::Rng;
use shaped_ldpc::code::OffsetMode;
use shaped_ldpc::gf2::SparseBinMatrix;
use shaped_ldpc::{LdpcCode, ShapingSpec};

/// Random parity-check matrix with `col_weight` ones per column, rows
/// chosen uniformly. Redrawn until the code has at least `min_k`
/// information bits.
pub fn random_code<R: Rng>(rng: &mut R, n: usize, m: usize, col_weight: usize, min_k: usize) -> LdpcCode {
    loop {
        let mut entries = Vec::new();
        for c in 0..n {
            for r in sample(rng, m, col_weight.min(m)) {
                entries.push((r, c));
            }
        }
        let h = SparseBinMatrix::from_entries(m, n, entries).expect("entries in range");
        if let Ok(code) = LdpcCode::build(h, []) {
            if code.k() >= min_k {
                return code;
            }
        }
    }
}

/// `ell` distinct shaping positions with random offsets.
pub fn random_spec<R: Rng>(rng: &mut R, code: &LdpcCode, ell: usize, p0: f64) -> ShapingSpec {
    let positions = sample(rng, code.k(), ell).into_vec();
    let offsets = (0..ell)
        .map(|_| {
            if rng.random::<bool>() {
                OffsetMode::WithOffset
            } else {
                OffsetMode::ZeroOffset
            }
        })
        .collect();
    ShapingSpec::new(code, positions, offsets, p0).expect("valid spec")
}

pub fn random_bits<R: Rng>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

/// The (9, 6) toy code whose parity-check matrix is `[G_p^T | I_3]`.
pub fn toy_code() -> LdpcCode {
    let h = SparseBinMatrix::from_row_adj(
        3,
        9,
        vec![vec![0, 1, 2, 3, 4, 6], vec![0, 2, 4, 5, 7], vec![1, 3, 5, 8]],
    )
    .expect("valid toy matrix");
    LdpcCode::build(h, []).expect("toy code")
}

pub fn weight(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}
