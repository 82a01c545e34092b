//! Constant-composition distribution matcher.
//!
//! A message of `k_in` uniform bits is read as an integer and unranked into
//! the set of length-`n_out` sequences with exactly `n_ones` ones, ordered
//! lexicographically with `0 < 1`. Dematching ranks the sequence back. The
//! arithmetic is exact, so the map is a bijection onto its image.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DmError {
    #[error("composition needs n_ones <= n_out, got {n_ones} > {n_out}")]
    InvalidComposition { n_out: usize, n_ones: usize },
    #[error("{k_in} input bits exceed the codebook capacity of {max} bits")]
    InputTooLong { k_in: usize, max: usize },
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("sequence has {found} ones, composition requires {expected}")]
    Composition { expected: usize, found: usize },
    #[error("sequence rank lies outside the codebook")]
    OutOfCodebook,
}

/// Output length and number of ones of every matched sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Composition {
    pub n_out: usize,
    pub n_ones: usize,
}

impl Composition {
    pub fn new(n_out: usize, n_ones: usize) -> Result<Self, DmError> {
        if n_ones > n_out {
            return Err(DmError::InvalidComposition { n_out, n_ones });
        }
        Ok(Composition { n_out, n_ones })
    }

    /// Zero-fraction realized by this composition.
    pub fn p0(&self) -> f64 {
        if self.n_out == 0 {
            return 1.0;
        }
        1.0 - self.n_ones as f64 / self.n_out as f64
    }
}

/// `n_ones = round(n_out * (1 - target_p0))`, halves away from zero.
pub fn choose_composition(n_out: usize, target_p0: f64) -> Composition {
    let ones = (n_out as f64 * (1.0 - target_p0)).round().clamp(0.0, n_out as f64) as usize;
    Composition { n_out, n_ones: ones }
}

/// Most biased composition (fewest ones) that still carries `k_in` bits.
pub fn composition_for_input(n_out: usize, k_in: usize) -> Result<Composition, DmError> {
    // C(n, w) grows with w up to n / 2, so the first fit is the most biased.
    let mut c = BigUint::one();
    for w in 0..=n_out / 2 {
        if max_bits(&c) >= k_in {
            return Ok(Composition { n_out, n_ones: w });
        }
        c = c * (n_out - w) / (w + 1);
    }
    Err(DmError::InputTooLong {
        k_in,
        max: max_bits(&binomial(n_out, n_out / 2)),
    })
}

/// `floor(log2(c))` for `c >= 1`.
fn max_bits(c: &BigUint) -> usize {
    (c.bits() as usize).saturating_sub(1)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Matcher for one composition and input length.
#[derive(Debug, Clone)]
pub struct DmCodebook {
    comp: Composition,
    k_in: usize,
    /// `C(n_out, n_ones)`.
    size: BigUint,
}

impl DmCodebook {
    /// Codebook using the full capacity `floor(log2 C(n_out, n_ones))`.
    pub fn new(comp: Composition) -> Self {
        let size = binomial(comp.n_out, comp.n_ones);
        DmCodebook {
            k_in: max_bits(&size),
            comp,
            size,
        }
    }

    /// Codebook with a fixed, possibly shorter, input length.
    pub fn with_input_len(comp: Composition, k_in: usize) -> Result<Self, DmError> {
        let full = Self::new(comp);
        if k_in > full.k_in {
            return Err(DmError::InputTooLong { k_in, max: full.k_in });
        }
        Ok(DmCodebook { k_in, ..full })
    }

    pub fn composition(&self) -> Composition {
        self.comp
    }

    pub fn k_in(&self) -> usize {
        self.k_in
    }

    pub fn n_out(&self) -> usize {
        self.comp.n_out
    }

    pub fn rate(&self) -> f64 {
        if self.comp.n_out == 0 {
            return 0.0;
        }
        self.k_in as f64 / self.comp.n_out as f64
    }

    /// Unranks the integer spelled by `msg` (most significant bit first).
    pub fn dm_match(&self, msg: &[u8]) -> Result<Vec<u8>, DmError> {
        if msg.len() != self.k_in {
            return Err(DmError::Length {
                expected: self.k_in,
                got: msg.len(),
            });
        }
        let mut index = bits_to_int(msg);
        let Composition { n_out, n_ones } = self.comp;
        let mut out = Vec::with_capacity(n_out);
        // `count` tracks C(len, ones) for the remaining suffix.
        let mut count = self.size.clone();
        let mut ones = n_ones;
        for pos in 0..n_out {
            let len = n_out - pos;
            if ones == 0 {
                out.resize(n_out, 0);
                break;
            }
            if ones == len {
                out.resize(n_out, 1);
                break;
            }
            // Sequences with a zero here: C(len - 1, ones).
            let with_zero = &count * (len - ones) / len;
            if index < with_zero {
                out.push(0);
                count = with_zero;
            } else {
                out.push(1);
                index -= &with_zero;
                count = count * ones / len;
                ones -= 1;
            }
        }
        Ok(out)
    }

    pub fn dm_dematch(&self, seq: &[u8]) -> Result<Vec<u8>, DmError> {
        let Composition { n_out, n_ones } = self.comp;
        if seq.len() != n_out {
            return Err(DmError::Length {
                expected: n_out,
                got: seq.len(),
            });
        }
        let found = seq.iter().filter(|&&b| b == 1).count();
        if found != n_ones {
            return Err(DmError::Composition {
                expected: n_ones,
                found,
            });
        }
        let mut rank = BigUint::zero();
        let mut count = self.size.clone();
        let mut ones = n_ones;
        for (pos, &b) in seq.iter().enumerate() {
            let len = n_out - pos;
            if ones == 0 || ones == len {
                break;
            }
            let with_zero = &count * (len - ones) / len;
            if b == 1 {
                rank += &with_zero;
                count = count * ones / len;
                ones -= 1;
            } else {
                count = with_zero;
            }
        }
        if rank.bits() as usize > self.k_in {
            return Err(DmError::OutOfCodebook);
        }
        Ok(int_to_bits(&rank, self.k_in))
    }
}

pub fn dm_match(cb: &DmCodebook, msg: &[u8]) -> Result<Vec<u8>, DmError> {
    cb.dm_match(msg)
}

pub fn dm_dematch(cb: &DmCodebook, seq: &[u8]) -> Result<Vec<u8>, DmError> {
    cb.dm_dematch(seq)
}

fn bits_to_int(bits: &[u8]) -> BigUint {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    // Little-endian byte order with bit 0 of byte 0 as the last message bit.
    for (i, &b) in bits.iter().rev().enumerate() {
        if b & 1 == 1 {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    BigUint::from_bytes_le(&bytes)
}

fn int_to_bits(x: &BigUint, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for i in 0..len {
        out[len - 1 - i] = x.bit(i as u64) as u8;
    }
    out
}
