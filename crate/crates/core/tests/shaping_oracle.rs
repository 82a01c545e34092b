//! The integer-multiple encoder against a floating-point tanh-rule
//! reference that recomputes every check message from scratch.

mod common;

use common::{random_bits, random_code, random_spec, toy_code};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shaped_ldpc::code::OffsetMode;
use shaped_ldpc::{build_shaping_graph, shape_encode, LdpcCode, ShapingSpec};

const INF: f64 = 1e6;

fn box_plus(inputs: &[f64]) -> f64 {
    let p: f64 = inputs.iter().map(|&x| (0.5 * x).tanh()).product();
    2.0 * p.clamp(-1.0 + 1e-16, 1.0 - 1e-16).atanh()
}

/// Decisions `(position, bit)` of the reference decimation encoder.
fn float_encode(code: &LdpcCode, spec: &ShapingSpec, v: &[u8]) -> Vec<(usize, u8)> {
    let k = code.k();
    let m = code.m();
    let l = spec.prior_llr();
    let gp = code.parity_part();
    let mut u = vec![0u8; k];
    let mut known = vec![true; k];
    for (&pos, &b) in spec.message_positions(k).iter().zip(v) {
        u[pos] = b;
    }
    for &pos in spec.positions() {
        known[pos] = false;
    }
    let tol = 1e-9 * l.abs().max(1.0);
    let mut order = Vec::new();
    let mut open: Vec<usize> = (0..spec.ell()).collect();
    open.sort_by_key(|&s| spec.positions()[s]);
    while !open.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (idx, &slot) in open.iter().enumerate() {
            let pos = spec.positions()[slot];
            let mut sum = 0.0;
            for j in 0..m {
                if !gp.get(pos, j) {
                    continue;
                }
                let mut inputs = vec![l];
                for i in (0..k).filter(|&i| i != pos && gp.get(i, j)) {
                    inputs.push(match (known[i], u[i]) {
                        (false, _) => 0.0,
                        (true, 0) => INF,
                        (true, _) => -INF,
                    });
                }
                sum += box_plus(&inputs);
            }
            if spec.offsets()[slot] == OffsetMode::WithOffset {
                sum += l;
            }
            match best {
                Some((_, b)) if sum.abs() <= b.abs() + tol => {}
                _ => best = Some((idx, sum)),
            }
        }
        let (idx, value) = best.expect("open slots remain");
        let slot = open.remove(idx);
        let pos = spec.positions()[slot];
        let bit = (value < -tol) as u8;
        u[pos] = bit;
        known[pos] = true;
        order.push((pos, bit));
    }
    order
}

fn integer_decisions(code: &LdpcCode, spec: &ShapingSpec, v: &[u8]) -> Vec<(usize, u8)> {
    let graph = build_shaping_graph(code, spec).unwrap();
    let res = shape_encode(code, &graph, v).unwrap();
    assert!(code.is_codeword(&res.codeword));
    res.trace.iter().map(|s| (s.position, s.bit)).collect()
}

#[test]
fn toy_code_all_inputs() {
    let code = toy_code();
    for p0 in [0.8, 0.3, 0.5] {
        let spec = ShapingSpec::with_positions(&code, vec![4, 5], p0).unwrap();
        for x in 0..16u8 {
            let v: Vec<u8> = (0..4).map(|b| (x >> (3 - b)) & 1).collect();
            assert_eq!(
                integer_decisions(&code, &spec, &v),
                float_encode(&code, &spec, &v),
                "p0 {p0}, v {v:?}"
            );
        }
    }
}

#[test]
fn random_mid_size_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..150 {
        let n = 24 + trial % 40;
        let m = n / 3 + trial % 5;
        let code = random_code(&mut rng, n, m, 3, 4);
        let ell = (2 + trial % 7).min(code.k());
        let p0 = [0.7, 0.85, 0.2][trial % 3];
        let spec = random_spec(&mut rng, &code, ell, p0);
        let v = random_bits(&mut rng, code.k() - ell);
        assert_eq!(
            integer_decisions(&code, &spec, &v),
            float_encode(&code, &spec, &v),
            "trial {trial}"
        );
    }
}
