//! Shaping encoder: sequential decimation on the Tanner graph of the
//! systematic generator matrix.
//!
//! Every parity bit is a check node joined to the systematic bits of its
//! column of `G_p` and to one degree-1 parity variable carrying the prior
//! `L = ln(p0 / (1 - p0))`. Message bits enter as `+-inf`, undetermined
//! shaping bits as `0`. Under those inputs the check update can only yield
//! `+-inf`, `0` or `+-L`, so the encoder runs on the exact alphabet
//! [`ShapeMsg`] and never touches floating point.
//!
//! Each of the `ell` iterations scores the undetermined shaping bits by the
//! sum of their incoming check messages plus an optional offset of one `L`,
//! fixes the most reliable one, and updates only the checks adjacent to it.
//! The codeword is finished by ordinary systematic encoding, so it is always
//! valid whatever the shaping bits turn out to be.

use crate::code::{CodeError, LdpcCode, OffsetMode, ShapingSpec};
use crate::gf2::BinMatrix;
use crate::info::h2;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapingError {
    #[error("shaping position {pos} outside the systematic part of length {k}")]
    PositionOutOfRange { pos: usize, k: usize },
    #[error("expected {expected} message bits, got {got}")]
    MessageLength { expected: usize, got: usize },
    #[error("target zero-probability {0} gives an unbounded shaping-bit count")]
    UnboundedShaping(f64),
    #[error("{ell} shaping bits exceed the exhaustive-search cap of {cap}")]
    SearchTooLarge { ell: usize, cap: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Rounding applied to the shaping-bit budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    #[default]
    Nearest,
    Floor,
    Ceil,
}

/// `ell ~ m * (1 / H2(p0) - 1)` shaping bits for `m` parity bits.
pub fn required_shaping_bits(m: usize, target_p0: f64, rounding: Rounding) -> Result<usize, ShapingError> {
    if !(target_p0 > 0.0 && target_p0 < 1.0) {
        return Err(ShapingError::UnboundedShaping(target_p0));
    }
    let x = m as f64 * (1.0 / h2(target_p0) - 1.0);
    let ell = match rounding {
        Rounding::Nearest => x.round(),
        Rounding::Floor => x.floor(),
        // Guard against 1e-15 noise pushing an integer up.
        Rounding::Ceil => (x - 1e-9).ceil(),
    };
    Ok(ell.max(0.0) as usize)
}

/// Message on one edge of the generator graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeMsg {
    /// `+inf` for bit 0, `-inf` for bit 1.
    Fixed(u8),
    /// `k * L` for the parity prior `L`.
    Mult(i64),
}

/// Outgoing messages of one check node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnOutput {
    /// One message per incoming systematic edge, same order.
    pub to_systematic: Vec<ShapeMsg>,
    pub to_parity: ShapeMsg,
}

/// Exact check-node update for the encoder's alphabet.
///
/// `incoming` are the systematic variable-to-check messages, which are
/// `Fixed` for decided bits and `Mult(0)` for undetermined shaping bits.
/// `parity_prior` is the message from the parity variable, `Mult(1)` in the
/// encoder.
pub fn cn_update_exact(incoming: &[ShapeMsg], parity_prior: ShapeMsg) -> CnOutput {
    let mut open = 0usize;
    let mut ones = 0u8;
    for m in incoming {
        match *m {
            ShapeMsg::Fixed(b) => ones ^= b & 1,
            ShapeMsg::Mult(0) => open += 1,
            ShapeMsg::Mult(k) => panic!("systematic edges never carry Mult({k})"),
        }
    }
    let to_parity = if open == 0 {
        ShapeMsg::Fixed(ones)
    } else {
        ShapeMsg::Mult(0)
    };
    let to_systematic = incoming
        .iter()
        .map(|m| {
            let (others_open, others_ones) = match *m {
                ShapeMsg::Fixed(b) => (open, ones ^ (b & 1)),
                _ => (open - 1, ones),
            };
            if others_open > 0 {
                return ShapeMsg::Mult(0);
            }
            match parity_prior {
                ShapeMsg::Mult(k) if others_ones == 1 => ShapeMsg::Mult(-k),
                ShapeMsg::Mult(k) => ShapeMsg::Mult(k),
                ShapeMsg::Fixed(b) => ShapeMsg::Fixed(others_ones ^ b),
            }
        })
        .collect();
    CnOutput {
        to_systematic,
        to_parity,
    }
}

/// Role of a systematic variable node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VnClass {
    Message,
    Shaping,
}

/// Tanner graph of `G_sys` specialised to one shaping placement.
#[derive(Debug, Clone)]
pub struct GeneratorGraph {
    spec: ShapingSpec,
    k: usize,
    /// Systematic neighbours of each check node; its parity VN is implicit.
    cn_adj: Vec<Vec<usize>>,
    vn_class: Vec<VnClass>,
    message_positions: Vec<usize>,
    /// Check nodes adjacent to each shaping slot (slot = index into positions).
    slot_cns: Vec<Vec<usize>>,
    /// Per check node: how many shaping slots it touches, and their XOR.
    cn_open: Vec<u32>,
    cn_open_xor: Vec<usize>,
    offsets: Vec<i64>,
    prior_llr: f64,
}

impl GeneratorGraph {
    pub fn spec(&self) -> &ShapingSpec {
        &self.spec
    }

    pub fn n_parity(&self) -> usize {
        self.cn_adj.len()
    }

    pub fn cn_adj(&self, cn: usize) -> &[usize] {
        &self.cn_adj[cn]
    }

    /// Degree of a check node including its parity VN.
    pub fn cn_degree(&self, cn: usize) -> usize {
        self.cn_adj[cn].len() + 1
    }

    pub fn vn_class(&self, i: usize) -> VnClass {
        self.vn_class[i]
    }

    pub fn message_positions(&self) -> &[usize] {
        &self.message_positions
    }

    pub fn message_len(&self) -> usize {
        self.message_positions.len()
    }

    pub fn shaping_positions(&self) -> &[usize] {
        self.spec.positions()
    }

    /// Systematic vector with `v` at the message positions and zero shaping bits.
    pub fn embed_message(&self, v: &[u8]) -> Vec<u8> {
        let mut u = vec![0u8; self.k];
        for (&p, &b) in self.message_positions.iter().zip(v) {
            u[p] = b;
        }
        u
    }

    pub fn extract_message(&self, u: &[u8]) -> Vec<u8> {
        self.message_positions.iter().map(|&p| u[p]).collect()
    }

    pub fn extract_shaping(&self, u: &[u8]) -> Vec<u8> {
        self.spec.positions().iter().map(|&p| u[p]).collect()
    }
}

pub fn build_shaping_graph(code: &LdpcCode, spec: &ShapingSpec) -> Result<GeneratorGraph, ShapingError> {
    let k = code.k();
    let m = code.m();
    if let Some(&pos) = spec.positions().iter().find(|&&p| p >= k) {
        return Err(ShapingError::PositionOutOfRange { pos, k });
    }
    let gp: &BinMatrix = code.parity_part();
    let mut cn_adj = vec![Vec::new(); m];
    for i in 0..k {
        for (j, adj) in cn_adj.iter_mut().enumerate() {
            if gp.get(i, j) {
                adj.push(i);
            }
        }
    }
    let mut vn_class = vec![VnClass::Message; k];
    let mut slot_cns = Vec::with_capacity(spec.ell());
    let mut cn_open = vec![0u32; m];
    let mut cn_open_xor = vec![0usize; m];
    for (slot, &p) in spec.positions().iter().enumerate() {
        vn_class[p] = VnClass::Shaping;
        let cns: Vec<usize> = (0..m).filter(|&j| gp.get(p, j)).collect();
        for &j in &cns {
            cn_open[j] += 1;
            cn_open_xor[j] ^= slot;
        }
        slot_cns.push(cns);
    }
    let offsets = spec
        .offsets()
        .iter()
        .map(|o| match o {
            OffsetMode::WithOffset => 1,
            OffsetMode::ZeroOffset => 0,
        })
        .collect();
    Ok(GeneratorGraph {
        message_positions: spec.message_positions(k),
        prior_llr: spec.prior_llr(),
        spec: spec.clone(),
        k,
        cn_adj,
        vn_class,
        slot_cns,
        cn_open,
        cn_open_xor,
        offsets,
    })
}

/// One undetermined shaping bit offered to a [`DecimationStrategy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    /// Index into the shaping positions.
    pub slot: usize,
    /// Systematic position of the bit.
    pub position: usize,
    /// Sum of incoming check messages, in multiples of `L`.
    pub incoming: i64,
    /// `incoming` plus the offset; the reliability is `tilde * L`.
    pub tilde: i64,
}

/// Picks which undetermined shaping bit to fix next.
pub trait DecimationStrategy {
    /// Returns an index into `candidates`, which is never empty and is
    /// ordered by ascending position.
    fn select(&self, candidates: &[Candidate], prior_llr: f64) -> usize;
}

/// Largest `|tilde * L|`, ties to the lowest position.
#[derive(Debug, Clone, Copy, Default)]
pub struct MostReliable;

impl DecimationStrategy for MostReliable {
    fn select(&self, candidates: &[Candidate], prior_llr: f64) -> usize {
        if prior_llr == 0.0 {
            return 0;
        }
        let mut best = 0;
        for (i, c) in candidates.iter().enumerate().skip(1) {
            if c.tilde.abs() > candidates[best].tilde.abs() {
                best = i;
            }
        }
        best
    }
}

/// `0` iff the reliability `tilde * L` is non-negative.
pub fn decide(tilde: i64, prior_llr: f64) -> u8 {
    let value = tilde as f64 * prior_llr;
    (value < 0.0) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionStep {
    pub position: usize,
    pub tilde: i64,
    pub bit: u8,
    /// No candidate received a nonzero check message this iteration.
    pub guess: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeResult {
    /// Codeword in original column order.
    pub codeword: Vec<u8>,
    /// Systematic part in generator order.
    pub systematic: Vec<u8>,
    /// Shaping bits, in the order of the shaping positions.
    pub shaping_bits: Vec<u8>,
    /// Parity bits in generator order.
    pub parity: Vec<u8>,
    pub trace: Vec<DecisionStep>,
}

pub fn shape_encode(code: &LdpcCode, graph: &GeneratorGraph, v: &[u8]) -> Result<ShapeResult, ShapingError> {
    shape_encode_with(code, graph, v, &MostReliable)
}

pub fn shape_encode_with(
    code: &LdpcCode,
    graph: &GeneratorGraph,
    v: &[u8],
    strategy: &dyn DecimationStrategy,
) -> Result<ShapeResult, ShapingError> {
    if v.len() != graph.message_len() {
        return Err(ShapingError::MessageLength {
            expected: graph.message_len(),
            got: v.len(),
        });
    }
    let mut u = graph.embed_message(v);
    let positions = graph.spec.positions();
    let ell = positions.len();

    // Check-node state: parity of decided inputs, open shaping inputs.
    let mut ones = code.parity_bits(&u)?;
    let mut open = graph.cn_open.clone();
    let mut open_xor = graph.cn_open_xor.clone();
    let mut incoming = vec![0i64; ell];
    let sign = |b: u8| if b == 0 { 1 } else { -1 };
    for j in 0..open.len() {
        if open[j] == 1 {
            incoming[open_xor[j]] += sign(ones[j]);
        }
    }

    let mut undetermined: Vec<usize> = (0..ell).collect();
    undetermined.sort_by_key(|&s| positions[s]);
    let mut trace = Vec::with_capacity(ell);
    let mut candidates = Vec::with_capacity(ell);
    while !undetermined.is_empty() {
        candidates.clear();
        candidates.extend(undetermined.iter().map(|&slot| Candidate {
            slot,
            position: positions[slot],
            incoming: incoming[slot],
            tilde: incoming[slot] + graph.offsets[slot],
        }));
        let pick = strategy.select(&candidates, graph.prior_llr);
        let chosen = candidates[pick];
        let bit = decide(chosen.tilde, graph.prior_llr);
        trace.push(DecisionStep {
            position: chosen.position,
            tilde: chosen.tilde,
            bit,
            guess: candidates.iter().all(|c| c.incoming == 0),
        });
        u[chosen.position] = bit;
        undetermined.remove(pick);

        for &j in &graph.slot_cns[chosen.slot] {
            ones[j] ^= bit;
            open[j] -= 1;
            open_xor[j] ^= chosen.slot;
            if open[j] == 1 {
                incoming[open_xor[j]] += sign(ones[j]);
            }
        }
    }

    let parity = code.parity_bits(&u)?;
    debug_assert_eq!(parity, ones);
    Ok(ShapeResult {
        codeword: code.assemble(&u, &parity),
        shaping_bits: graph.extract_shaping(&u),
        systematic: u,
        parity,
        trace,
    })
}

/// What [`llps_exact`] minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightScope {
    /// Hamming weight of the `n - k` parity bits.
    #[default]
    Parity,
    /// Weight of the parity bits plus the shaping bits.
    ShapingAndParity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlpsSolution {
    pub shaping_bits: Vec<u8>,
    pub parity_weight: usize,
    /// The minimized weight under the chosen scope.
    pub weight: usize,
}

pub const DEFAULT_LLPS_CAP: usize = 20;

/// Exhaustive minimum-weight choice of the shaping bits.
///
/// Ties go to the assignment with the smallest value when the shaping bits
/// are read as an integer, first position most significant.
pub fn llps_exact(code: &LdpcCode, graph: &GeneratorGraph, v: &[u8]) -> Result<LlpsSolution, ShapingError> {
    llps_exact_with(code, graph, v, DEFAULT_LLPS_CAP, WeightScope::Parity)
}

pub fn llps_exact_with(
    code: &LdpcCode,
    graph: &GeneratorGraph,
    v: &[u8],
    cap: usize,
    scope: WeightScope,
) -> Result<LlpsSolution, ShapingError> {
    let ell = graph.spec.ell();
    if ell > cap {
        return Err(ShapingError::SearchTooLarge { ell, cap });
    }
    if v.len() != graph.message_len() {
        return Err(ShapingError::MessageLength {
            expected: graph.message_len(),
            got: v.len(),
        });
    }
    let gp = code.parity_part();
    let u = graph.embed_message(v);
    let base = crate::gf2::pack(&code.parity_bits(&u)?);
    let rows: Vec<&[u64]> = graph.spec.positions().iter().map(|&p| gp.row_words(p)).collect();

    // Gray-code walk; bit `ell - 1 - i` of the assignment is shaping bit i.
    let mut acc = base;
    let mut best: Option<(usize, u64, usize)> = None;
    let mut gray = 0u64;
    for step in 0u64..1 << ell {
        if step > 0 {
            let flip = step.trailing_zeros() as usize;
            gray ^= 1 << flip;
            for (a, w) in acc.iter_mut().zip(rows[ell - 1 - flip]) {
                *a ^= w;
            }
        }
        let parity_weight: usize = acc.iter().map(|w| w.count_ones() as usize).sum();
        let weight = match scope {
            WeightScope::Parity => parity_weight,
            WeightScope::ShapingAndParity => parity_weight + gray.count_ones() as usize,
        };
        let better = match best {
            None => true,
            Some((w, g, _)) => weight < w || (weight == w && gray < g),
        };
        if better {
            best = Some((weight, gray, parity_weight));
        }
    }
    let (weight, assignment, parity_weight) = best.expect("at least one assignment");
    Ok(LlpsSolution {
        shaping_bits: (0..ell).map(|i| (assignment >> (ell - 1 - i) & 1) as u8).collect(),
        parity_weight,
        weight,
    })
}

/// True iff shaping-encoding the decoded message bits reproduces the
/// decoded shaping bits. `decoded_u` is the systematic part in generator order.
pub fn reencode_check(code: &LdpcCode, graph: &GeneratorGraph, decoded_u: &[u8]) -> bool {
    if decoded_u.len() != code.k() {
        return false;
    }
    let v = graph.extract_message(decoded_u);
    match shape_encode(code, graph, &v) {
        Ok(r) => r.shaping_bits == graph.extract_shaping(decoded_u),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::tests::toy_code;
    use crate::code::ShapingSpec;

    fn toy() -> (LdpcCode, GeneratorGraph) {
        let code = toy_code();
        let spec = ShapingSpec::default_placement(&code, 2, 0.7).unwrap();
        let graph = build_shaping_graph(&code, &spec).unwrap();
        (code, graph)
    }

    #[test]
    fn budget() {
        assert_eq!(required_shaping_bits(264, 0.5, Rounding::Nearest).unwrap(), 0);
        // H2(p) = 1/2 at p = 0.889972...
        assert_eq!(required_shaping_bits(100, 0.889972, Rounding::Nearest).unwrap(), 100);
        assert_eq!(
            required_shaping_bits(100, 1.0 - 0.889972, Rounding::Nearest).unwrap(),
            100
        );
        assert_eq!(required_shaping_bits(7, 0.75, Rounding::Floor).unwrap(), 1);
        assert_eq!(required_shaping_bits(7, 0.75, Rounding::Ceil).unwrap(), 2);
        assert_eq!(
            required_shaping_bits(10, 1.0, Rounding::Nearest).unwrap_err(),
            ShapingError::UnboundedShaping(1.0)
        );
        assert!(required_shaping_bits(10, 0.0, Rounding::Nearest).is_err());
        // Ten extra bits on 264 parity bits correspond to H2(p0) = 264/274.
        let p0 = crate::info::h2_inv(264.0 / 274.0, crate::info::Branch::Upper);
        assert_eq!(required_shaping_bits(264, p0, Rounding::Nearest).unwrap(), 10);
    }

    #[test]
    fn toy_graph_edges() {
        let (_, g) = toy();
        assert_eq!(g.n_parity(), 3);
        assert_eq!(g.cn_adj(0), &[0, 1, 2, 3, 4]);
        assert_eq!(g.cn_adj(1), &[0, 2, 4, 5]);
        assert_eq!(g.cn_adj(2), &[1, 3, 5]);
        assert_eq!(g.vn_class(4), VnClass::Shaping);
        assert_eq!(g.vn_class(3), VnClass::Message);
        assert_eq!(g.cn_degree(0), 6);
    }

    #[test]
    fn no_shaping_bits() {
        let code = toy_code();
        let spec = ShapingSpec::default_placement(&code, 0, 0.7).unwrap();
        let g = build_shaping_graph(&code, &spec).unwrap();
        assert!((0..6).all(|i| g.vn_class(i) == VnClass::Message));
        let v = [1, 0, 1, 1, 0, 1];
        let r = shape_encode(&code, &g, &v).unwrap();
        assert_eq!(r.codeword, code.encode_systematic(&v).unwrap());
        assert!(r.trace.is_empty());
    }

    #[test]
    fn toy_worked_example() {
        let (code, g) = toy();
        let r = shape_encode(&code, &g, &[0, 0, 1, 0]).unwrap();
        assert_eq!(
            r.trace,
            vec![
                DecisionStep {
                    position: 5,
                    tilde: 2,
                    bit: 0,
                    guess: false
                },
                DecisionStep {
                    position: 4,
                    tilde: -1,
                    bit: 1,
                    guess: false
                },
            ]
        );
        assert_eq!(r.shaping_bits, vec![1, 0]);
        assert_eq!(r.codeword, vec![0, 0, 1, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn check_update_cases() {
        use ShapeMsg::*;
        // v2, v4 fixed to 0, s2 open.
        let out = cn_update_exact(&[Fixed(0), Fixed(0), Mult(0)], Mult(1));
        assert_eq!(out.to_systematic[2], Mult(1));
        assert_eq!(out.to_parity, Mult(0));
        let out = cn_update_exact(&[Fixed(0), Fixed(0), Fixed(1), Fixed(0), Mult(0)], Mult(1));
        assert_eq!(out.to_systematic[4], Mult(-1));
        let out = cn_update_exact(&[Fixed(0), Fixed(1), Mult(0), Mult(0)], Mult(1));
        assert_eq!(out.to_systematic[2], Mult(0));
        assert_eq!(out.to_systematic[3], Mult(0));
        let out = cn_update_exact(&[Fixed(1), Fixed(0), Fixed(1)], Mult(1));
        assert_eq!(out.to_parity, Fixed(0));
        assert_eq!(out.to_systematic[0], Mult(-1));
    }

    #[test]
    fn toy_llps() {
        let (code, g) = toy();
        let sol = llps_exact(&code, &g, &[0, 0, 1, 0]).unwrap();
        assert_eq!(sol.shaping_bits, vec![1, 0]);
        assert_eq!(sol.parity_weight, 0);
        let wide = llps_exact_with(&code, &g, &[0, 0, 1, 0], 20, WeightScope::ShapingAndParity).unwrap();
        assert_eq!((wide.shaping_bits, wide.weight), (vec![1, 0], 1));
        assert_eq!(
            llps_exact_with(&code, &g, &[0, 0, 1, 0], 1, WeightScope::Parity).unwrap_err(),
            ShapingError::SearchTooLarge { ell: 2, cap: 1 }
        );
    }

    #[test]
    fn llps_without_shaping_is_plain_encoding() {
        let code = toy_code();
        let spec = ShapingSpec::default_placement(&code, 0, 0.7).unwrap();
        let g = build_shaping_graph(&code, &spec).unwrap();
        let v = [1, 1, 0, 1, 0, 1];
        let w = code.parity_bits(&v).unwrap().iter().filter(|&&b| b == 1).count();
        assert_eq!(llps_exact(&code, &g, &v).unwrap().parity_weight, w);
    }

    #[test]
    fn reencode_detects_changes() {
        let (code, g) = toy();
        let mut flips_caught = 0;
        for m in 0..16u8 {
            let v: Vec<u8> = (0..4).map(|i| m >> (3 - i) & 1).collect();
            let r = shape_encode(&code, &g, &v).unwrap();
            assert!(reencode_check(&code, &g, &r.systematic));
            for p in g.shaping_positions() {
                let mut u = r.systematic.clone();
                u[*p] ^= 1;
                assert!(!reencode_check(&code, &g, &u));
            }
            for i in 0..4 {
                let mut v2 = v.clone();
                v2[i] ^= 1;
                let mut u = r.systematic.clone();
                u[g.message_positions()[i]] ^= 1;
                let expect = shape_encode(&code, &g, &v2).unwrap().shaping_bits == r.shaping_bits;
                assert_eq!(reencode_check(&code, &g, &u), expect);
                flips_caught += !expect as usize;
            }
        }
        assert!(flips_caught > 0);
    }

    #[test]
    fn message_length_checked() {
        let (code, g) = toy();
        assert_eq!(
            shape_encode(&code, &g, &[0; 5]).unwrap_err(),
            ShapingError::MessageLength { expected: 4, got: 5 }
        );
    }

    #[test]
    fn negative_prior_flips_decisions() {
        let code = toy_code();
        let spec = ShapingSpec::default_placement(&code, 2, 0.3).unwrap();
        let g = build_shaping_graph(&code, &spec).unwrap();
        let r = shape_encode(&code, &g, &[0, 0, 1, 0]).unwrap();
        assert!(code.is_codeword(&r.codeword));
        assert_eq!(r.trace[0].bit, 1);
    }
}
