//! Monte Carlo FER/BER campaigns.
//!
//! Every frame draws its randomness from a counter-based stream keyed by
//! `(seed, frame)`, so a frame can be replayed on its own and results do not
//! depend on how frames are spread over threads. Frames are evaluated in
//! batches and accumulated in index order; a point stops at the exact frame
//! where the error budget is reached.

mod config;

pub use config::{CodeSource, ConfigError, DmMode, PriorMode, ShapingCount, ShapingParams, SimConfig};

use crate::bp::BpDecoder;
use crate::channel::{self, ChannelConfig, ClassPriors, PositionClass};
use crate::code::{self, CodeError, LdpcCode, QcDesign, ShapingSpec};
use crate::dm::{self, DmCodebook, DmError};
use crate::gf2::SparseBinMatrix;
use crate::shaping::{self, GeneratorGraph, ShapingError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::io::{self, Write};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("parity-check file: {0}")]
    Alist(#[from] code::AlistError),
    #[error("base matrix file: {0}")]
    Base(#[from] code::BaseMatrixError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Shaping(#[from] ShapingError),
    #[error(transparent)]
    Dm(#[from] DmError),
    #[error("{0}")]
    Invalid(String),
}

/// Execution path for a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel {
        workers: usize,
    },
}

impl Execution {
    /// `workers == 1` runs sequentially; `0` uses every core.
    pub fn from_workers(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        if workers != 1 {
            return Execution::Parallel { workers };
        }
        let _ = workers;
        Execution::Sequential
    }
}

/// Per-class zero-fractions; `None` for classes with no positions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassFractions {
    pub dm: Option<f64>,
    pub shaping: Option<f64>,
    pub parity: Option<f64>,
    pub punctured: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct ZeroCounts {
    zeros: [u64; 4],
    totals: [u64; 4],
    tx_zeros: u64,
    tx_total: u64,
}

fn class_index(c: PositionClass) -> usize {
    match c {
        PositionClass::Dm => 0,
        PositionClass::Shaping => 1,
        PositionClass::Parity => 2,
        PositionClass::Punctured => 3,
    }
}

impl ZeroCounts {
    fn add(&mut self, codeword: &[u8], classes: &[PositionClass]) {
        for (&b, &c) in codeword.iter().zip(classes) {
            let i = class_index(c);
            self.totals[i] += 1;
            self.zeros[i] += (b == 0) as u64;
        }
    }

    fn add_transmitted(&mut self, codeword: &[u8], punctured: &BTreeSet<usize>) {
        for (i, &b) in codeword.iter().enumerate() {
            if !punctured.contains(&i) {
                self.tx_total += 1;
                self.tx_zeros += (b == 0) as u64;
            }
        }
    }

    fn merge(&mut self, o: &ZeroCounts) {
        for i in 0..4 {
            self.zeros[i] += o.zeros[i];
            self.totals[i] += o.totals[i];
        }
        self.tx_zeros += o.tx_zeros;
        self.tx_total += o.tx_total;
    }

    fn fraction(&self, i: usize) -> Option<f64> {
        (self.totals[i] > 0).then(|| self.zeros[i] as f64 / self.totals[i] as f64)
    }

    fn fractions(&self) -> ClassFractions {
        ClassFractions {
            dm: self.fraction(0),
            shaping: self.fraction(1),
            parity: self.fraction(2),
            punctured: self.fraction(3),
        }
    }

    /// Shaping bits, transmitted or not.
    fn all_shaping(&self) -> Option<f64> {
        let t = self.totals[1] + self.totals[3];
        (t > 0).then(|| (self.zeros[1] + self.zeros[3]) as f64 / t as f64)
    }
}

/// Exact zero-fractions of each position class over `codewords`.
pub fn measure_empirical(codewords: &[Vec<u8>], classes: &[PositionClass]) -> ClassFractions {
    let mut counts = ZeroCounts::default();
    for c in codewords {
        counts.add(c, classes);
    }
    counts.fractions()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub mean_iters: f64,
    pub p0_dm: Option<f64>,
    /// All shaping bits, punctured ones included.
    pub p0_shaping: Option<f64>,
    pub p0_parity: Option<f64>,
    /// Zero-fraction of transmitted symbols.
    pub p0_tx: f64,
    pub seconds: f64,
}

pub const CSV_HEADER: &str = "snr_db,frames,frame_errors,fer,ber,mean_iters,p0_dm,p0_shaping,p0_parity,seconds";

impl SimRecord {
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{:.6e},{:.6e},{:.4},{},{},{},{:.3}",
            self.snr_db,
            self.frames,
            self.frame_errors,
            self.fer,
            self.ber,
            self.mean_iters,
            opt(self.p0_dm),
            opt(self.p0_shaping),
            opt(self.p0_parity),
            self.seconds
        )
    }
}

pub fn write_csv<W: Write>(mut out: W, records: &[SimRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Result of one simulated frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameOutcome {
    pub frame_error: bool,
    pub bit_errors: u64,
    pub iterations: usize,
    counts: ZeroCounts,
}

/// Everything a campaign needs, built and validated once.
#[derive(Debug, Clone)]
pub struct Campaign {
    code: LdpcCode,
    graph: GeneratorGraph,
    codebook: Option<DmCodebook>,
    classes: Vec<PositionClass>,
    priors: ClassPriors,
    tx_p0: f64,
    snr_db: Vec<f64>,
    max_frames: u64,
    max_errors: u64,
    max_iter: usize,
    seed: u64,
    batch: usize,
    execution: Execution,
}

/// Reads or generates the parity-check matrix of `source`.
pub fn load_code_matrix(source: &CodeSource) -> Result<SparseBinMatrix, SimError> {
    let read = |p: &std::path::Path| {
        std::fs::read_to_string(p).map_err(|source| SimError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    Ok(match source {
        CodeSource::Alist(p) => code::load_alist(&read(p)?)?,
        CodeSource::BaseMatrix(p) => code::BaseMatrix::parse(&read(p)?)?.lift(),
        CodeSource::Generated { rows, cols, lift, seed } => {
            if *rows == 0 || *cols <= *rows || *lift == 0 {
                return Err(SimError::Invalid(format!(
                    "cannot generate a {rows}x{cols} base matrix"
                )));
            }
            let design = QcDesign {
                rows: *rows,
                cols: *cols,
                lift_size: *lift,
                systematic_weights: vec![3],
            };
            code::design_qc(&design, &mut ChaCha8Rng::seed_from_u64(*seed)).lift()
        }
        CodeSource::Matrix(h) => h.clone(),
    })
}

fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const MESSAGE_SALT: u64 = 1;
const CALIBRATION_SALT: u64 = 2;

impl Campaign {
    pub fn prepare(cfg: &SimConfig) -> Result<Self, SimError> {
        let h = load_code_matrix(&cfg.code)?;
        Self::prepare_with_code(cfg, LdpcCode::build(h, cfg.puncture.iter().copied())?)
    }

    pub fn prepare_with_code(cfg: &SimConfig, code: LdpcCode) -> Result<Self, SimError> {
        if cfg.snr_db.is_empty() {
            return Err(SimError::Invalid("snr_db list is empty".into()));
        }
        if cfg.max_iter == 0 || cfg.batch == 0 {
            return Err(SimError::Invalid("max_iter and batch must be positive".into()));
        }
        let sp = &cfg.shaping;
        let ell = match (sp.count, &sp.positions) {
            (_, Some(p)) => p.len(),
            (ShapingCount::Fixed(l), None) => l,
            (ShapingCount::Auto(r), None) => shaping::required_shaping_bits(code.m(), sp.target_p0, r)?,
        };
        let mut spec = match &sp.positions {
            Some(p) => ShapingSpec::with_positions(&code, p.clone(), sp.target_p0)?,
            None => ShapingSpec::default_placement(&code, ell, sp.target_p0)?,
        };
        if let Some(mode) = sp.offset {
            spec.replace_offsets(mode);
        }
        let graph = shaping::build_shaping_graph(&code, &spec)?;
        let n_msg = graph.message_len();
        let codebook = match cfg.dm {
            DmMode::Bypass => None,
            DmMode::Ccdm { k_in, ones } => {
                let comp = match ones {
                    Some(w) => dm::Composition::new(n_msg, w)?,
                    None => dm::composition_for_input(n_msg, k_in)?,
                };
                Some(DmCodebook::with_input_len(comp, k_in)?)
            }
        };

        let shaping_set: BTreeSet<usize> = spec.positions().iter().copied().collect();
        let classes: Vec<PositionClass> = (0..code.n())
            .map(|col| {
                let order = code.order_of(col);
                if order >= code.k() {
                    PositionClass::Parity
                } else if !shaping_set.contains(&order) {
                    PositionClass::Dm
                } else if code.is_punctured(col) {
                    PositionClass::Punctured
                } else {
                    PositionClass::Shaping
                }
            })
            .collect();

        let mut campaign = Campaign {
            code,
            graph,
            codebook,
            classes,
            priors: ClassPriors::UNIFORM,
            tx_p0: 0.5,
            snr_db: cfg.snr_db.clone(),
            max_frames: cfg.max_frames,
            max_errors: cfg.max_errors,
            max_iter: cfg.max_iter,
            seed: cfg.seed,
            batch: cfg.batch,
            execution: Execution::from_workers(cfg.workers),
        };
        let calib = campaign.calibrate(cfg.calibration_frames.max(1))?;
        campaign.tx_p0 = calib.tx_zeros as f64 / calib.tx_total.max(1) as f64;
        campaign.priors = match cfg.priors {
            PriorMode::Uniform => ClassPriors::UNIFORM,
            PriorMode::Explicit(p) => p,
            PriorMode::Empirical => {
                let f = calib.fractions();
                ClassPriors {
                    dm: f.dm.unwrap_or(0.5),
                    shaping: f.shaping.unwrap_or(0.5),
                    parity: f.parity.unwrap_or(0.5),
                    punctured: f.punctured.unwrap_or(0.5),
                }
            }
        };
        Ok(campaign)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn code(&self) -> &LdpcCode {
        &self.code
    }

    pub fn graph(&self) -> &GeneratorGraph {
        &self.graph
    }

    pub fn codebook(&self) -> Option<&DmCodebook> {
        self.codebook.as_ref()
    }

    pub fn classes(&self) -> &[PositionClass] {
        &self.classes
    }

    pub fn priors(&self) -> ClassPriors {
        self.priors
    }

    /// Zero-fraction of the transmitted symbols measured before the run.
    pub fn transmitted_p0(&self) -> f64 {
        self.tx_p0
    }

    /// Information bits per transmitted symbol.
    pub fn rate(&self) -> f64 {
        let info = self.info_len() as f64;
        info / (self.code.n() - self.code.puncture_set().len()) as f64
    }

    fn info_len(&self) -> usize {
        self.codebook.as_ref().map_or(self.graph.message_len(), |cb| cb.k_in())
    }

    fn draw_message<R: Rng>(&self, rng: &mut R) -> Result<(Vec<u8>, Vec<u8>), DmError> {
        let info: Vec<u8> = (0..self.info_len()).map(|_| rng.random_range(0..2u8)).collect();
        let v = match &self.codebook {
            Some(cb) => cb.dm_match(&info)?,
            None => info.clone(),
        };
        Ok((info, v))
    }

    /// Encodes one frame's message; returns `(info bits, codeword)`.
    pub fn encode_frame(&self, frame: u64) -> Result<(Vec<u8>, Vec<u8>), SimError> {
        let mut rng = channel::frame_rng(mix(self.seed, MESSAGE_SALT), frame);
        let (info, v) = self.draw_message(&mut rng)?;
        let res = shaping::shape_encode(&self.code, &self.graph, &v)?;
        Ok((info, res.codeword))
    }

    fn calibrate(&self, frames: u64) -> Result<ZeroCounts, SimError> {
        let mut counts = ZeroCounts::default();
        for f in 0..frames {
            let mut rng = channel::frame_rng(mix(self.seed, CALIBRATION_SALT), f);
            let (_, v) = self.draw_message(&mut rng)?;
            let c = shaping::shape_encode(&self.code, &self.graph, &v)?.codeword;
            counts.add(&c, &self.classes);
            counts.add_transmitted(&c, self.code.puncture_set());
        }
        Ok(counts)
    }

    pub fn channel_for(&self, snr_db: f64) -> ChannelConfig {
        ChannelConfig::from_snr_db(snr_db, 1.0, self.tx_p0, self.priors)
    }

    /// Runs frame `frame` of SNR point `point` from scratch.
    pub fn run_frame(&self, point: usize, frame: u64) -> Result<FrameOutcome, SimError> {
        let mut decoder = BpDecoder::new(self.code.h());
        self.run_frame_with(&mut decoder, point, frame)
    }

    fn run_frame_with(&self, decoder: &mut BpDecoder, point: usize, frame: u64) -> Result<FrameOutcome, SimError> {
        let (info, c) = self.encode_frame(frame)?;
        let mut counts = ZeroCounts::default();
        counts.add(&c, &self.classes);
        counts.add_transmitted(&c, self.code.puncture_set());

        let ch = self.channel_for(self.snr_db[point]);
        let punct = self.code.puncture_set();
        let mut y = channel::map_ook(&c, ch.amplitude, punct);
        let mut rng = channel::frame_rng(mix(self.seed, 16 + point as u64), frame);
        channel::add_awgn_in_place(&mut y, ch.sigma, &mut rng);
        let llr = channel::demap_llr(&y, &ch, &self.classes, punct).map_err(|e| SimError::Invalid(e.to_string()))?;
        let dec = decoder
            .decode(&llr, self.max_iter)
            .map_err(|e| SimError::Invalid(e.to_string()))?;

        let u_hat = self.code.extract_systematic(&dec.hard_bits);
        let v_hat = self.graph.extract_message(&u_hat);
        let decoded = match &self.codebook {
            Some(cb) => cb.dm_dematch(&v_hat).ok(),
            None => Some(v_hat.clone()),
        };
        let (frame_error, bit_errors) = match decoded {
            Some(m) => {
                let e = m.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
                (e > 0, e)
            }
            None => {
                // Dematching failed: count mismatched matcher outputs instead.
                let v = self.graph.extract_message(&self.code.extract_systematic(&c));
                let e = v.iter().zip(&v_hat).filter(|(a, b)| a != b).count();
                (true, e.clamp(1, info.len()) as u64)
            }
        };
        Ok(FrameOutcome {
            frame_error,
            bit_errors,
            iterations: dec.iterations_used,
            counts,
        })
    }

    fn run_batch(&self, point: usize, start: u64, end: u64) -> Result<Vec<FrameOutcome>, SimError> {
        match self.execution {
            Execution::Sequential => {
                let mut decoder = BpDecoder::new(self.code.h());
                (start..end)
                    .map(|f| self.run_frame_with(&mut decoder, point, f))
                    .collect()
            }
            #[cfg(feature = "parallel")]
            Execution::Parallel { .. } => {
                use rayon::prelude::*;
                (start..end)
                    .into_par_iter()
                    .map_init(
                        || BpDecoder::new(self.code.h()),
                        |decoder, f| self.run_frame_with(decoder, point, f),
                    )
                    .collect()
            }
        }
    }

    pub fn run_point(&self, point: usize) -> Result<SimRecord, SimError> {
        let t0 = Instant::now();
        let (mut frames, mut frame_errors, mut bit_errors, mut iters) = (0u64, 0u64, 0u64, 0u64);
        let mut counts = ZeroCounts::default();
        'outer: while frames < self.max_frames && frame_errors < self.max_errors {
            let end = (frames + self.batch as u64).min(self.max_frames);
            for o in self.run_batch(point, frames, end)? {
                frames += 1;
                frame_errors += o.frame_error as u64;
                bit_errors += o.bit_errors;
                iters += o.iterations as u64;
                counts.merge(&o.counts);
                if frame_errors >= self.max_errors {
                    break 'outer;
                }
            }
        }
        let f = counts.fractions();
        let info_bits = frames * self.info_len() as u64;
        Ok(SimRecord {
            snr_db: self.snr_db[point],
            frames,
            frame_errors,
            bit_errors,
            fer: frame_errors as f64 / frames.max(1) as f64,
            ber: bit_errors as f64 / info_bits.max(1) as f64,
            mean_iters: iters as f64 / frames.max(1) as f64,
            p0_dm: f.dm,
            p0_shaping: counts.all_shaping(),
            p0_parity: f.parity,
            p0_tx: counts.tx_zeros as f64 / counts.tx_total.max(1) as f64,
            seconds: t0.elapsed().as_secs_f64(),
        })
    }

    pub fn run(&self) -> Result<Vec<SimRecord>, SimError> {
        let go = || (0..self.snr_db.len()).map(|p| self.run_point(p)).collect();
        match self.execution {
            Execution::Sequential => go(),
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers } => rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| SimError::Invalid(e.to_string()))?
                .install(go),
        }
    }
}

pub fn run_campaign(cfg: &SimConfig) -> Result<Vec<SimRecord>, SimError> {
    Campaign::prepare(cfg)?.run()
}
