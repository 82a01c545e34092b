//! On-off keying over AWGN: mapping, noise, SNR bookkeeping and LLRs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Role of a codeword position, used to pick its prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PositionClass {
    Dm,
    Shaping,
    Parity,
    /// Untransmitted shaping bits.
    Punctured,
}

/// Prior zero-probability per position class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassPriors {
    pub dm: f64,
    pub shaping: f64,
    pub parity: f64,
    pub punctured: f64,
}

impl ClassPriors {
    pub const UNIFORM: ClassPriors = ClassPriors {
        dm: 0.5,
        shaping: 0.5,
        parity: 0.5,
        punctured: 0.5,
    };

    pub fn get(&self, class: PositionClass) -> f64 {
        match class {
            PositionClass::Dm => self.dm,
            PositionClass::Shaping => self.shaping,
            PositionClass::Parity => self.parity,
            PositionClass::Punctured => self.punctured,
        }
    }

    /// `ln(q0 / (1 - q0))`, finite even for degenerate priors.
    pub fn llr(&self, class: PositionClass) -> f64 {
        let q = self.get(class).clamp(1e-12, 1.0 - 1e-12);
        (q / (1.0 - q)).ln()
    }
}

impl Default for ClassPriors {
    fn default() -> Self {
        Self::UNIFORM
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub amplitude: f64,
    pub sigma: f64,
    /// Zero-fraction of transmitted symbols, for power accounting.
    pub p0: f64,
    pub priors: ClassPriors,
}

impl ChannelConfig {
    /// Noise level giving `snr_db` for amplitude `amplitude` and symbol
    /// zero-fraction `p0`.
    pub fn from_snr_db(snr_db: f64, amplitude: f64, p0: f64, priors: ClassPriors) -> Self {
        let gamma = 10f64.powf(snr_db / 10.0);
        ChannelConfig {
            amplitude,
            sigma: ((1.0 - p0) * amplitude * amplitude / gamma).sqrt(),
            p0,
            priors,
        }
    }

    pub fn gamma(&self) -> f64 {
        (1.0 - self.p0) * self.amplitude * self.amplitude / (self.sigma * self.sigma)
    }
}

pub fn snr_from_config(cfg: &ChannelConfig) -> f64 {
    10.0 * cfg.gamma().log10()
}

/// `0 -> 0`, `1 -> A`; punctured positions are dropped.
pub fn map_ook(bits: &[u8], amplitude: f64, puncture_set: &BTreeSet<usize>) -> Vec<f64> {
    bits.iter()
        .enumerate()
        .filter(|(i, _)| !puncture_set.contains(i))
        .map(|(_, &b)| if b & 1 == 1 { amplitude } else { 0.0 })
        .collect()
}

pub fn add_awgn<R: Rng + ?Sized>(signal: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    let mut y = signal.to_vec();
    add_awgn_in_place(&mut y, sigma, rng);
    y
}

pub fn add_awgn_in_place<R: Rng + ?Sized>(signal: &mut [f64], sigma: f64, rng: &mut R) {
    for s in signal.iter_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *s += sigma * n;
    }
}

/// Channel-plus-prior LLRs for every codeword position.
///
/// Transmitted positions get `(A^2 - 2 A y) / (2 sigma^2)` plus their class
/// prior; punctured positions get the prior alone.
pub fn demap_llr(
    y: &[f64],
    cfg: &ChannelConfig,
    classes: &[PositionClass],
    puncture_set: &BTreeSet<usize>,
) -> Result<Vec<f64>, ChannelError> {
    let tx = classes.len() - puncture_set.iter().filter(|&&p| p < classes.len()).count();
    if y.len() != tx {
        return Err(ChannelError::DimensionMismatch {
            expected: tx,
            got: y.len(),
        });
    }
    let a = cfg.amplitude;
    let inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    let mut samples = y.iter();
    Ok(classes
        .iter()
        .enumerate()
        .map(|(i, &class)| {
            let prior = cfg.priors.llr(class);
            if puncture_set.contains(&i) {
                prior
            } else {
                let yi = *samples.next().expect("length checked");
                (a * a - 2.0 * a * yi) * inv + prior
            }
        })
        .collect())
}

/// Independent generator for one frame of one campaign.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}
