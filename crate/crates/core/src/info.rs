//! Achievable rates for on-off keying over AWGN.
//!
//! SNR is `gamma = (1 - q0) A^2 / sigma^2`, so a rate for a given input
//! distribution at a given `gamma` fixes the amplitude implicitly. Mutual
//! information is integrated with 64-node Gauss-Hermite quadrature.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("target rate {target} outside the achievable range [{low}, {high}] on the SNR search interval")]
    Unreachable { target: f64, low: f64, high: f64 },
    #[error("class fractions must be non-negative and sum to 1 (sum = {0})")]
    Fractions(f64),
    #[error("zero-probability {0} outside [0, 1]")]
    Probability(f64),
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Which preimage of [`h2`] to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `p <= 1/2`
    Lower,
    /// `p >= 1/2`
    Upper,
}

/// Inverse binary entropy by bisection, `|h2(p) - y| <= 1e-12`.
pub fn h2_inv(y: f64, branch: Branch) -> f64 {
    let y = y.clamp(0.0, 1.0);
    if y == 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    let p = 0.5 * (lo + hi);
    match branch {
        Branch::Lower => p,
        Branch::Upper => 1.0 - p,
    }
}

const GH_NODES: usize = 64;

/// Nodes and weights for `int exp(-t^2) f(t) dt`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gh64() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_hermite(GH_NODES))
}

fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `I(X; Y)` in bits for `P(X = 0) = q0`, `X in {0, A}` and unit noise
/// variance, where `amp` is the ratio `A / sigma`.
pub fn mi_ook_amplitude(q0: f64, amp: f64) -> f64 {
    if !(q0 > 0.0 && q0 < 1.0) || amp <= 0.0 {
        return 0.0;
    }
    let (t, w) = gh64();
    let (lq0, lq1) = (q0.ln(), (1.0 - q0).ln());
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    for (&ti, &wi) in t.iter().zip(w) {
        let n = std::f64::consts::SQRT_2 * ti;
        // Received y = x + n; d(y) = ln p(y|A) - ln p(y|0).
        let d0 = amp * n - 0.5 * amp * amp;
        let d1 = amp * (amp + n) - 0.5 * amp * amp;
        i0 += wi * -logaddexp(lq0, lq1 + d0);
        i1 += wi * -logaddexp(lq0 - d1, lq1);
    }
    let total = (q0 * i0 + (1.0 - q0) * i1) / (PI.sqrt() * LN_2);
    total.clamp(0.0, h2(q0))
}

/// Linear SNR from dB.
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `I(X; Y)` with the amplitude set so that `(1 - q0) A^2 / sigma^2 = gamma`.
pub fn mi_ook(q0: f64, gamma: f64) -> f64 {
    if q0.is_nan() || q0 >= 1.0 || gamma <= 0.0 {
        return 0.0;
    }
    mi_ook_amplitude(q0, (gamma / (1.0 - q0)).sqrt())
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (f(x), x)
}

/// Maximum of [`mi_ook`] over `q0` at fixed `gamma`: `(rate, q0*)`.
pub fn capacity_ook(gamma: f64) -> (f64, f64) {
    golden_max(|q| mi_ook(q, gamma), 1e-6, 1.0 - 1e-6, 1e-6)
}

/// One group of codeword positions sharing an input distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateClass {
    pub fraction: f64,
    pub q0: f64,
    /// Untransmitted classes carry neither rate nor energy.
    pub transmitted: bool,
}

impl RateClass {
    pub fn new(fraction: f64, q0: f64) -> Self {
        RateClass {
            fraction,
            q0,
            transmitted: true,
        }
    }

    pub fn punctured(fraction: f64) -> Self {
        RateClass {
            fraction,
            q0: 0.5,
            transmitted: false,
        }
    }
}

/// Mixture of position classes for a time-sharing rate.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    classes: Vec<RateClass>,
}

impl InputSpec {
    pub fn new(classes: Vec<RateClass>) -> Result<Self, RateError> {
        let sum: f64 = classes.iter().map(|c| c.fraction).sum();
        if (sum - 1.0).abs() > 1e-9 || classes.iter().any(|c| c.fraction < 0.0) {
            return Err(RateError::Fractions(sum));
        }
        if let Some(c) = classes.iter().find(|c| !(0.0..=1.0).contains(&c.q0)) {
            return Err(RateError::Probability(c.q0));
        }
        Ok(InputSpec { classes })
    }

    pub fn classes(&self) -> &[RateClass] {
        &self.classes
    }

    /// Zero-fraction over the transmitted positions.
    pub fn transmitted_p0(&self) -> f64 {
        let (num, den) = self
            .classes
            .iter()
            .filter(|c| c.transmitted)
            .fold((0.0, 0.0), |(n, d), c| (n + c.fraction * c.q0, d + c.fraction));
        if den == 0.0 {
            1.0
        } else {
            num / den
        }
    }
}

/// `sum_i fraction_i * I(q0_i)` at a common amplitude fixed by the aggregate
/// distribution of transmitted symbols.
pub fn ts_rate(spec: &InputSpec, gamma: f64) -> f64 {
    let p1 = 1.0 - spec.transmitted_p0();
    if p1 <= 0.0 || gamma <= 0.0 {
        return 0.0;
    }
    let amp = (gamma / p1).sqrt();
    spec.classes
        .iter()
        .filter(|c| c.transmitted)
        .map(|c| c.fraction * mi_ook_amplitude(c.q0, amp))
        .sum()
}

/// Time sharing with systematic fraction `code_rate` shaped (optimized `q0`)
/// and uniform parity: `(rate, q0*)`.
pub fn ts_capacity(code_rate: f64, gamma: f64) -> (f64, f64) {
    golden_max(
        |q| {
            let spec = InputSpec {
                classes: vec![RateClass::new(code_rate, q), RateClass::new(1.0 - code_rate, 0.5)],
            };
            ts_rate(&spec, gamma)
        },
        1e-6,
        1.0 - 1e-6,
        1e-6,
    )
}

const SNR_SEARCH_DB: (f64, f64) = (-30.0, 40.0);

/// Smallest SNR in dB at which the non-decreasing `rate_fn(gamma)` reaches
/// `target`, by bisection to well under 0.01 dB.
pub fn snr_for_rate(rate_fn: impl Fn(f64) -> f64, target: f64) -> Result<f64, RateError> {
    let (mut lo, mut hi) = SNR_SEARCH_DB;
    let (r_lo, r_hi) = (rate_fn(db_to_lin(lo)), rate_fn(db_to_lin(hi)));
    if !(r_lo <= target && target <= r_hi) {
        return Err(RateError::Unreachable {
            target,
            low: r_lo,
            high: r_hi,
        });
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if rate_fn(db_to_lin(mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoidal `I(X; Y)` over `y in [-10 sigma, A + 10 sigma]`.
    fn mi_trapezoid(q0: f64, gamma: f64) -> f64 {
        let a = (gamma / (1.0 - q0)).sqrt();
        let pdf = |y: f64| (-0.5 * y * y).exp() / (2.0 * PI).sqrt();
        let steps = 200_000;
        let (lo, hi) = (-10.0, a + 10.0);
        let dy = (hi - lo) / steps as f64;
        let mut sum = 0.0;
        for i in 0..=steps {
            let y = lo + i as f64 * dy;
            let (f0, f1) = (pdf(y), pdf(y - a));
            let py = q0 * f0 + (1.0 - q0) * f1;
            let mut g = 0.0;
            if f0 > 0.0 {
                g += q0 * f0 * (f0 / py).log2();
            }
            if f1 > 0.0 {
                g += (1.0 - q0) * f1 * (f1 / py).log2();
            }
            let wt = if i == 0 || i == steps { 0.5 } else { 1.0 };
            sum += wt * g;
        }
        sum * dy
    }

    #[test]
    fn entropy_values() {
        assert_eq!(h2(0.5), 1.0);
        assert_eq!(h2(0.0), 0.0);
        assert_eq!(h2(1.0), 0.0);
        assert!((h2(0.11) - 0.49992).abs() < 1e-4);
    }

    #[test]
    fn entropy_inverse() {
        assert!((h2_inv(1.0, Branch::Upper) - 0.5).abs() < 1e-9);
        assert!(h2_inv(0.0, Branch::Lower) < 1e-12);
        assert!(h2_inv(0.0, Branch::Upper) > 1.0 - 1e-12);
        let p = h2_inv(0.5, Branch::Upper);
        assert!((p - 0.8899721).abs() < 1e-6);
        assert!((h2(p) - 0.5).abs() <= 1e-12);
        for y in [0.01, 0.3, 0.77, 0.999] {
            assert!((h2(h2_inv(y, Branch::Lower)) - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite(64);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-12);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12);
        assert!((m4 - 3.0 * PI.sqrt() / 4.0).abs() < 1e-11);
    }

    #[test]
    fn quadrature_matches_trapezoid() {
        for &q0 in &[0.5, 0.7, 0.83, 0.95] {
            for &db in &[-5.0, 0.0, 4.34, 8.0] {
                let g = db_to_lin(db);
                let a = mi_ook(q0, g);
                let b = mi_trapezoid(q0, g);
                assert!((a - b).abs() < 1e-4, "q0={q0} db={db}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn limits_and_bounds() {
        assert!(mi_ook(0.5, db_to_lin(-40.0)) < 1e-3);
        assert!((mi_ook(0.7, db_to_lin(30.0)) - h2(0.7)).abs() < 1e-6);
        let mut prev = 0.0;
        for i in 0..40 {
            let v = mi_ook(0.8, db_to_lin(-10.0 + 0.5 * i as f64));
            assert!(v >= prev && v <= h2(0.8));
            prev = v;
        }
    }

    #[test]
    fn capacity_dominates() {
        for db in [-3.0, 0.0, 3.0, 6.0] {
            let g = db_to_lin(db);
            let (c, q) = capacity_ook(g);
            assert!(q > 0.5 && q < 1.0);
            for i in 1..20 {
                assert!(c + 1e-12 >= mi_ook(i as f64 / 20.0, g));
            }
        }
    }

    #[test]
    fn capacity_values() {
        let (c, _) = capacity_ook(db_to_lin(4.34));
        assert!((c - 2.0 / 3.0).abs() < 2e-3);
        let (c, q) = capacity_ook(db_to_lin(-1.05));
        assert!((c - 1.0 / 3.0).abs() < 2e-3);
        assert!((q - 0.83).abs() < 0.01);
        assert!((mi_ook(0.5, db_to_lin(5.32)) - 2.0 / 3.0).abs() < 2e-3);
    }

    #[test]
    fn snr_lines() {
        let uni = |g| mi_ook(0.5, g);
        let opt = |g| capacity_ook(g).0;
        assert!((snr_for_rate(uni, 2.0 / 3.0).unwrap() - 5.32).abs() < 0.05);
        assert!((snr_for_rate(uni, 1.0 / 3.0).unwrap() - 0.755).abs() < 0.05);
        assert!((snr_for_rate(opt, 1.0 / 3.0).unwrap() - -1.05).abs() < 0.05);
        assert!(matches!(snr_for_rate(uni, 1.5), Err(RateError::Unreachable { .. })));
    }

    #[test]
    fn time_sharing() {
        let g = db_to_lin(2.0);
        let single = InputSpec::new(vec![RateClass::new(1.0, 0.5)]).unwrap();
        assert!((ts_rate(&single, g) - mi_ook(0.5, g)).abs() < 1e-12);
        let ts = snr_for_rate(|g| ts_capacity(0.75, g).0, 2.0 / 3.0).unwrap();
        assert!((ts - 4.66).abs() < 0.05, "{ts}");
        let punct = InputSpec::new(vec![RateClass::new(0.9, 0.5), RateClass::punctured(0.1)]).unwrap();
        assert!((ts_rate(&punct, g) - 0.9 * mi_ook(0.5, g)).abs() < 1e-12);
        assert!(InputSpec::new(vec![RateClass::new(0.5, 0.5)]).is_err());
        assert!(InputSpec::new(vec![RateClass::new(1.0, 1.5)]).is_err());
    }
}
