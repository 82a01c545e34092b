//! Campaign configuration as flat `key = value` text.
//!
//! ```text
//! # code: exactly one of code.alist, code.base, code.generate
//! code.base      = wimax_like.txt       # relative to the config file
//! code.generate  = 6,24,44,7            # QC design: rows,cols,Z,seed
//! code.puncture  = 0,1,2                # original column indices
//! shaping.p0     = 0.75
//! shaping.ell    = auto                 # or an integer
//! shaping.rounding = nearest            # nearest | floor | ceil
//! shaping.positions = 10,11,12          # systematic-order indices
//! shaping.offset = default              # default | with | zero
//! dm.mode        = ccdm                 # ccdm | bypass
//! dm.k           = 704
//! dm.ones        = 120                  # optional, else the fewest that fit
//! snr_db         = 3.0:0.25:5.0         # list "a,b,c" or range "start:step:stop"
//! max_frames     = 10000
//! max_errors     = 100
//! max_iter       = 50
//! seed           = 1
//! priors         = empirical            # empirical | uniform | dm,shaping,parity,punctured
//! workers        = 0                    # 0 = all cores, 1 = sequential
//! batch          = 256
//! calibration_frames = 200
//! ```

use crate::channel::ClassPriors;
use crate::code::OffsetMode;
use crate::gf2::SparseBinMatrix;
use crate::shaping::Rounding;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("no code source given")]
    MissingCode,
    #[error("snr_db list is empty")]
    NoSnr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodeSource {
    Alist(PathBuf),
    BaseMatrix(PathBuf),
    Generated {
        rows: usize,
        cols: usize,
        lift: usize,
        seed: u64,
    },
    Matrix(SparseBinMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapingCount {
    /// Budget from the parity count and `target_p0`.
    Auto(Rounding),
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapingParams {
    pub target_p0: f64,
    pub count: ShapingCount,
    /// Explicit placement; `None` uses the default placement rule.
    pub positions: Option<Vec<usize>>,
    /// Overrides the offset of every shaping bit.
    pub offset: Option<OffsetMode>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DmMode {
    /// Uniform bits straight into the encoder.
    Bypass,
    Ccdm {
        k_in: usize,
        ones: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorMode {
    Empirical,
    Uniform,
    Explicit(ClassPriors),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code: CodeSource,
    pub puncture: Vec<usize>,
    pub shaping: ShapingParams,
    pub dm: DmMode,
    pub snr_db: Vec<f64>,
    pub max_frames: u64,
    pub max_errors: u64,
    pub max_iter: usize,
    pub seed: u64,
    pub priors: PriorMode,
    pub workers: usize,
    pub batch: usize,
    pub calibration_frames: u64,
}

impl SimConfig {
    pub fn new(code: CodeSource) -> Self {
        SimConfig {
            code,
            puncture: Vec::new(),
            shaping: ShapingParams {
                target_p0: 0.5,
                count: ShapingCount::Fixed(0),
                positions: None,
                offset: None,
            },
            dm: DmMode::Bypass,
            snr_db: Vec::new(),
            max_frames: 1000,
            max_errors: 100,
            max_iter: 50,
            seed: 0,
            priors: PriorMode::Empirical,
            workers: 0,
            batch: 256,
            calibration_frames: 200,
        }
    }

    /// Parses config text. Relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: idx + 1 })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = SimConfig::new(CodeSource::Alist(PathBuf::new()));
        let mut have_code = false;
        for (k, v) in &pairs {
            have_code |= k.starts_with("code.") && k != "code.puncture";
            cfg.apply(k, v, base_dir)?;
        }
        if !have_code {
            return Err(ConfigError::MissingCode);
        }
        if cfg.snr_db.is_empty() {
            return Err(ConfigError::NoSnr);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Ok(Self::parse(&text, dir)?)
    }

    /// Sets one key; also used for command-line overrides.
    pub fn apply(&mut self, key: &str, value: &str, base_dir: &Path) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        match key {
            "code.alist" => self.code = CodeSource::Alist(path(value)),
            "code.base" => self.code = CodeSource::BaseMatrix(path(value)),
            "code.generate" => {
                let v: Vec<u64> = parse_list(value).ok_or_else(bad)?;
                let [rows, cols, lift, seed] = v[..] else {
                    return Err(bad());
                };
                self.code = CodeSource::Generated {
                    rows: rows as usize,
                    cols: cols as usize,
                    lift: lift as usize,
                    seed,
                };
            }
            "code.puncture" => self.puncture = parse_list(value).ok_or_else(bad)?,
            "shaping.p0" => self.shaping.target_p0 = value.parse().map_err(|_| bad())?,
            "shaping.ell" => {
                self.shaping.count = match value {
                    "auto" => match self.shaping.count {
                        ShapingCount::Auto(r) => ShapingCount::Auto(r),
                        ShapingCount::Fixed(_) => ShapingCount::Auto(Rounding::Nearest),
                    },
                    v => ShapingCount::Fixed(v.parse().map_err(|_| bad())?),
                }
            }
            "shaping.rounding" => {
                let r = match value {
                    "nearest" => Rounding::Nearest,
                    "floor" => Rounding::Floor,
                    "ceil" => Rounding::Ceil,
                    _ => return Err(bad()),
                };
                self.shaping.count = ShapingCount::Auto(r);
            }
            "shaping.positions" => self.shaping.positions = Some(parse_list(value).ok_or_else(bad)?),
            "shaping.offset" => {
                self.shaping.offset = match value {
                    "default" => None,
                    "with" => Some(OffsetMode::WithOffset),
                    "zero" => Some(OffsetMode::ZeroOffset),
                    _ => return Err(bad()),
                }
            }
            "dm.mode" => {
                self.dm = match (value, self.dm) {
                    ("bypass", _) => DmMode::Bypass,
                    ("ccdm", DmMode::Ccdm { .. }) => self.dm,
                    ("ccdm", DmMode::Bypass) => DmMode::Ccdm { k_in: 0, ones: None },
                    _ => return Err(bad()),
                }
            }
            "dm.k" => {
                let k_in = value.parse().map_err(|_| bad())?;
                self.dm = match self.dm {
                    DmMode::Ccdm { ones, .. } => DmMode::Ccdm { k_in, ones },
                    DmMode::Bypass => DmMode::Ccdm { k_in, ones: None },
                };
            }
            "dm.ones" => {
                let ones = Some(value.parse().map_err(|_| bad())?);
                self.dm = match self.dm {
                    DmMode::Ccdm { k_in, .. } => DmMode::Ccdm { k_in, ones },
                    DmMode::Bypass => DmMode::Ccdm { k_in: 0, ones },
                };
            }
            "snr_db" => self.snr_db = parse_snr(value).ok_or_else(bad)?,
            "max_frames" => self.max_frames = value.parse().map_err(|_| bad())?,
            "max_errors" => self.max_errors = value.parse().map_err(|_| bad())?,
            "max_iter" => self.max_iter = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "workers" => self.workers = value.parse().map_err(|_| bad())?,
            "batch" => self.batch = value.parse().map_err(|_| bad())?,
            "calibration_frames" => self.calibration_frames = value.parse().map_err(|_| bad())?,
            "priors" => {
                self.priors = match value {
                    "empirical" => PriorMode::Empirical,
                    "uniform" => PriorMode::Uniform,
                    v => {
                        let p: Vec<f64> = parse_list(v).ok_or_else(bad)?;
                        let [dm, shaping, parity, punctured] = p[..] else {
                            return Err(bad());
                        };
                        if p.iter().any(|q| !(0.0..=1.0).contains(q)) {
                            return Err(bad());
                        }
                        PriorMode::Explicit(ClassPriors {
                            dm,
                            shaping,
                            parity,
                            punctured,
                        })
                    }
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse().ok()).collect()
}

fn parse_snr(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        [a, step, b] => {
            let (a, step, b): (f64, f64, f64) = (
                a.trim().parse().ok()?,
                step.trim().parse().ok()?,
                b.trim().parse().ok()?,
            );
            if step <= 0.0 || b < a {
                return None;
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Some((0..count).map(|i| a + i as f64 * step).collect())
        }
        [_] => parse_list(s),
        _ => None,
    }
}
