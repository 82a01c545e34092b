//! Flooding sum-product decoder on the parity-check Tanner graph.

use crate::gf2::SparseBinMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("expected {expected} LLRs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("max_iter must be at least 1")]
    NoIterations,
}

/// Magnitude cap applied to every message.
pub const DEFAULT_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub hard_bits: Vec<u8>,
    pub app: Vec<f64>,
    pub iterations_used: usize,
    /// Syndrome is zero and every decision is backed by a nonzero APP LLR.
    pub converged: bool,
}

/// Decoder owning its message memory for one parity-check matrix.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    n: usize,
    clamp: f64,
    /// Edges grouped by check node.
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    /// Edge ids grouped by variable node.
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    scratch: Vec<f64>,
}

impl BpDecoder {
    pub fn new(h: &SparseBinMatrix) -> Self {
        let mut check_start = Vec::with_capacity(h.rows() + 1);
        let mut edge_var = Vec::with_capacity(h.nnz());
        check_start.push(0);
        for r in 0..h.rows() {
            edge_var.extend_from_slice(h.row(r));
            check_start.push(edge_var.len());
        }
        let mut var_start = vec![0; h.cols() + 1];
        for &v in &edge_var {
            var_start[v + 1] += 1;
        }
        for v in 0..h.cols() {
            var_start[v + 1] += var_start[v];
        }
        let mut fill = var_start.clone();
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        let max_deg = h.row_weights().into_iter().max().unwrap_or(0);
        BpDecoder {
            n: h.cols(),
            clamp: DEFAULT_CLAMP,
            v2c: vec![0.0; edge_var.len()],
            c2v: vec![0.0; edge_var.len()],
            scratch: vec![0.0; max_deg],
            check_start,
            edge_var,
            var_start,
            var_edges,
        }
    }

    pub fn with_clamp(mut self, clamp: f64) -> Self {
        self.clamp = clamp;
        self
    }

    fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.check_start
            .windows(2)
            .all(|w| self.edge_var[w[0]..w[1]].iter().fold(0u8, |acc, &v| acc ^ bits[v]) == 0)
    }

    fn hard_decide(app: &[f64], bits: &mut [u8]) -> bool {
        let mut decided = true;
        for (b, &l) in bits.iter_mut().zip(app) {
            *b = (l < 0.0) as u8;
            decided &= l != 0.0;
        }
        decided
    }

    pub fn decode(&mut self, llr: &[f64], max_iter: usize) -> Result<DecodeResult, DecodeError> {
        if llr.len() != self.n {
            return Err(DecodeError::DimensionMismatch {
                expected: self.n,
                got: llr.len(),
            });
        }
        if max_iter == 0 {
            return Err(DecodeError::NoIterations);
        }
        let cap = self.clamp;
        let llr: Vec<f64> = llr.iter().map(|l| l.clamp(-cap, cap)).collect();
        self.c2v.iter_mut().for_each(|m| *m = 0.0);
        let mut app = llr.clone();
        let mut hard = vec![0u8; self.n];
        if Self::hard_decide(&app, &mut hard) && self.syndrome_ok(&hard) {
            return Ok(DecodeResult {
                hard_bits: hard,
                app,
                iterations_used: 0,
                converged: true,
            });
        }

        let tanh_cap = (cap / 2.0).tanh();
        for iter in 1..=max_iter {
            // Variable to check.
            for (v, &l) in llr.iter().enumerate() {
                let edges = &self.var_edges[self.var_start[v]..self.var_start[v + 1]];
                let total = l + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
                for &e in edges {
                    self.v2c[e] = (total - self.c2v[e]).clamp(-cap, cap);
                }
            }
            // Check to variable, tanh rule with prefix/suffix products.
            for c in 0..self.check_start.len() - 1 {
                let (s, t) = (self.check_start[c], self.check_start[c + 1]);
                match t - s {
                    0 => {}
                    1 => self.c2v[s] = 0.0,
                    2 => {
                        self.c2v[s] = self.v2c[s + 1];
                        self.c2v[s + 1] = self.v2c[s];
                    }
                    d => {
                        let tanhs = &mut self.scratch[..d];
                        for (x, &m) in tanhs.iter_mut().zip(&self.v2c[s..t]) {
                            *x = (0.5 * m).tanh();
                        }
                        let mut prefix = 1.0;
                        for (out, &x) in self.c2v[s..t].iter_mut().zip(tanhs.iter()) {
                            *out = prefix;
                            prefix *= x;
                        }
                        let mut suffix = 1.0;
                        for i in (0..d).rev() {
                            let p = (self.c2v[s + i] * suffix).clamp(-tanh_cap, tanh_cap);
                            self.c2v[s + i] = 2.0 * odd_atanh(p);
                            suffix *= tanhs[i];
                        }
                    }
                }
            }
            for v in 0..self.n {
                let edges = &self.var_edges[self.var_start[v]..self.var_start[v + 1]];
                app[v] = llr[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
            }
            let decided = Self::hard_decide(&app, &mut hard);
            if decided && self.syndrome_ok(&hard) {
                return Ok(DecodeResult {
                    hard_bits: hard,
                    app,
                    iterations_used: iter,
                    converged: true,
                });
            }
        }
        Ok(DecodeResult {
            hard_bits: hard,
            app,
            iterations_used: max_iter,
            converged: false,
        })
    }
}

/// `atanh` evaluated on `|p|` so that negating the input negates the output
/// bit for bit; the std formula is not symmetric in the last ulp.
fn odd_atanh(p: f64) -> f64 {
    p.abs().atanh().copysign(p)
}

pub fn bp_decode(h: &SparseBinMatrix, llr: &[f64], max_iter: usize) -> Result<DecodeResult, DecodeError> {
    BpDecoder::new(h).decode(llr, max_iter)
}

pub fn syndrome_check(h: &SparseBinMatrix, bits: &[u8]) -> bool {
    bits.len() == h.cols() && h.syndrome_is_zero(bits)
}

/// Single check-node update: extrinsic outputs for `inputs`.
pub fn check_node_update(inputs: &[f64]) -> Vec<f64> {
    if inputs.len() == 2 {
        return vec![inputs[1], inputs[0]];
    }
    (0..inputs.len())
        .map(|i| {
            let p: f64 = inputs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &m)| (0.5 * m).tanh())
                .product();
            2.0 * odd_atanh(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::tests::{toy_code, toy_h};

    fn signed(c: &[u8], mag: f64) -> Vec<f64> {
        c.iter().map(|&b| if b == 1 { -mag } else { mag }).collect()
    }

    #[test]
    fn noiseless_codeword() {
        let code = toy_code();
        let c = code.encode_systematic(&[1, 0, 1, 1, 0, 1]).unwrap();
        let r = bp_decode(code.h(), &signed(&c, 40.0), 10).unwrap();
        assert!(r.converged && r.iterations_used <= 1);
        assert_eq!(r.hard_bits, c);
    }

    #[test]
    fn single_erasure_recovered() {
        let h = toy_h();
        for erased in 0..9 {
            let mut llr = vec![40.0; 9];
            llr[erased] = 0.0;
            let r = bp_decode(&h, &llr, 5).unwrap();
            assert!(r.converged, "position {erased}");
            assert_eq!(r.hard_bits, vec![0; 9]);
            assert!(r.app[erased] > 0.0);
        }
    }

    #[test]
    fn all_zero_llrs_stay_undecided() {
        let r = bp_decode(&toy_h(), &[0.0; 9], 20).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 20);
        assert_eq!(r.hard_bits, vec![0; 9]);
        assert!(r.app.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn syndrome() {
        let code = toy_code();
        let c = code.encode_systematic(&[0, 1, 1, 0, 1, 1]).unwrap();
        assert!(syndrome_check(code.h(), &c));
        assert!(syndrome_check(code.h(), &[0; 9]));
        for i in 0..9 {
            let mut bad = c.clone();
            bad[i] ^= 1;
            assert!(!syndrome_check(code.h(), &bad));
        }
    }

    #[test]
    fn degree_two_passes_through() {
        assert_eq!(check_node_update(&[1.7, -0.3]), vec![-0.3, 1.7]);
        let out = check_node_update(&[2.0, 3.0, -40.0]);
        assert!(out[2].abs() < 2.0 && out[0] < 0.0 && out[2] > 0.0);
    }

    #[test]
    fn dimension_errors() {
        assert_eq!(
            bp_decode(&toy_h(), &[0.0; 3], 1).unwrap_err(),
            DecodeError::DimensionMismatch { expected: 9, got: 3 }
        );
        assert_eq!(
            bp_decode(&toy_h(), &[1.0; 9], 0).unwrap_err(),
            DecodeError::NoIterations
        );
    }
}
