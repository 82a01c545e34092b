use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shaped_ldpc::code::{self, BaseMatrix, LdpcCode, OffsetMode, QcDesign, ShapingSpec};
use shaped_ldpc::dm::{self, Composition, DmCodebook};
use shaped_ldpc::gf2::{self, SparseBinMatrix};
use shaped_ldpc::info::{self, InputSpec, RateClass};
use shaped_ldpc::shaping::{self, Rounding};
use shaped_ldpc::sim::{self, Campaign, SimConfig};
use shaped_ldpc::BpDecoder;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Shaped LDPC coding for on-off keying.
#[derive(Parser)]
#[command(name = "shaped-ldpc", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print dimensions and degree profiles of a code.
    Codeinfo(CodeArgs),
    /// Write a random quasi-cyclic base matrix.
    Gencode {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        lift: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Systematic column weights, cycled.
        #[arg(long, value_delimiter = ',', default_value = "3")]
        weights: Vec<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Constant-composition matching, one sequence per line.
    Dm {
        #[arg(value_enum)]
        action: DmAction,
        #[command(flatten)]
        comp: CompArgs,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Shape-encode message lines into codeword lines.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        shaping: ShapingArgs,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the decision trace (position, tilde, bit, guess).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Decode one codeword from a file of LLRs.
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        shaping: ShapingArgs,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
    },
    /// SNR in dB needed for a rate under an input distribution.
    Capacity {
        #[arg(long)]
        rate: f64,
        /// uniform | optimal | ts | classes=FRACTION:Q0,...  (Q0 `p` = punctured)
        #[arg(long)]
        dist: String,
        /// Code rate for `ts`.
        #[arg(long, default_value_t = 0.75)]
        code_rate: f64,
    },
    /// Run a Monte Carlo campaign and write CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override a config entry, `key=value`.
        #[arg(long = "set")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// CSV destination; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DmAction {
    Match,
    Dematch,
}

#[derive(Args)]
struct CodeArgs {
    /// Parity-check matrix: alist or QC base-matrix text.
    #[arg(long)]
    code: PathBuf,
    /// Punctured original column indices.
    #[arg(long, value_delimiter = ',')]
    puncture: Vec<usize>,
}

#[derive(Args)]
struct CompArgs {
    #[arg(long)]
    n: usize,
    /// Ones per output sequence.
    #[arg(long, conflicts_with = "p0")]
    ones: Option<usize>,
    /// Target zero-probability, rounded to a composition.
    #[arg(long)]
    p0: Option<f64>,
    /// Input bits per sequence; defaults to the full codebook.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct ShapingArgs {
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    /// Number of shaping bits or `auto`.
    #[arg(long, default_value = "0")]
    ell: String,
    /// Explicit systematic-order shaping positions.
    #[arg(long, value_delimiter = ',')]
    positions: Vec<usize>,
    #[arg(long, value_enum)]
    offset: Option<OffsetArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OffsetArg {
    With,
    Zero,
}

fn read_matrix(path: &Path) -> Result<SparseBinMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match code::load_alist(&text) {
        Ok(h) => Ok(h),
        Err(alist_err) => match BaseMatrix::parse(&text) {
            Ok(b) => Ok(b.lift()),
            Err(base_err) => bail!(
                "{}: not an alist ({alist_err}) nor a base matrix ({base_err})",
                path.display()
            ),
        },
    }
}

fn load_code(args: &CodeArgs) -> Result<LdpcCode> {
    let h = read_matrix(&args.code)?;
    Ok(LdpcCode::build(h, args.puncture.iter().copied())?)
}

fn build_spec(code: &LdpcCode, args: &ShapingArgs) -> Result<ShapingSpec> {
    let mut spec = if !args.positions.is_empty() {
        ShapingSpec::with_positions(code, args.positions.clone(), args.p0)?
    } else {
        let ell = match args.ell.as_str() {
            "auto" => shaping::required_shaping_bits(code.m(), args.p0, Rounding::Nearest)?,
            s => s.parse().with_context(|| format!("bad --ell `{s}`"))?,
        };
        ShapingSpec::default_placement(code, ell, args.p0)?
    };
    match args.offset {
        Some(OffsetArg::With) => spec.replace_offsets(OffsetMode::WithOffset),
        Some(OffsetArg::Zero) => spec.replace_offsets(OffsetMode::ZeroOffset),
        None => {}
    }
    Ok(spec)
}

fn read_bit_lines(path: &Path) -> Result<Vec<Vec<u8>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => bail!("{}:{}: expected 0/1, found `{c}`", path.display(), i + 1),
                })
                .collect()
        })
        .collect()
}

fn bits_line(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn profile(weights: &[usize]) -> String {
    let mut hist = BTreeMap::new();
    for &w in weights {
        *hist.entry(w).or_insert(0usize) += 1;
    }
    hist.iter()
        .map(|(w, c)| format!("{w}:{c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn codebook(c: &CompArgs) -> Result<DmCodebook> {
    let comp = match (c.ones, c.p0) {
        (Some(w), _) => Composition::new(c.n, w)?,
        (None, Some(p)) => dm::choose_composition(c.n, p),
        (None, None) => bail!("give --ones or --p0"),
    };
    Ok(match c.k {
        Some(k) => DmCodebook::with_input_len(comp, k)?,
        None => DmCodebook::new(comp),
    })
}

fn parse_classes(s: &str) -> Result<InputSpec> {
    let classes = s
        .split(',')
        .map(|item| {
            let (f, q) = item.split_once(':').with_context(|| format!("bad class `{item}`"))?;
            let f: f64 = f.trim().parse().with_context(|| format!("bad fraction `{f}`"))?;
            Ok(match q.trim() {
                "p" => RateClass::punctured(f),
                q => RateClass::new(f, q.parse().with_context(|| format!("bad q0 `{q}`"))?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InputSpec::new(classes)?)
}

fn run(cli: Cli) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match cli.cmd {
        Command::Codeinfo(args) => {
            let code = load_code(&args)?;
            let h = code.h();
            writeln!(out, "n_c {}", code.n())?;
            writeln!(out, "k_c {}", code.k())?;
            writeln!(out, "checks {}", h.rows())?;
            writeln!(out, "rank {}", gf2::rank(&h.to_dense()))?;
            writeln!(out, "rate {:.6}", code.rate())?;
            writeln!(out, "punctured {}", code.puncture_set().len())?;
            writeln!(out, "row_weights {}", profile(&h.row_weights()))?;
            writeln!(out, "col_weights {}", profile(&h.col_weights()))?;
        }
        Command::Gencode {
            rows,
            cols,
            lift,
            seed,
            weights,
            output,
        } => {
            if rows == 0 || cols <= rows || lift == 0 {
                bail!("need 0 < rows < cols and lift > 0");
            }
            let design = QcDesign {
                rows,
                cols,
                lift_size: lift,
                systematic_weights: weights,
            };
            let base = code::design_qc(&design, &mut ChaCha8Rng::seed_from_u64(seed));
            write_file(&output, &base.to_text())?;
        }
        Command::Dm {
            action,
            comp,
            input,
            output,
        } => {
            let cb = codebook(&comp)?;
            let mut out = String::new();
            for (i, line) in read_bit_lines(&input)?.iter().enumerate() {
                let res = match action {
                    DmAction::Match => cb.dm_match(line),
                    DmAction::Dematch => cb.dm_dematch(line),
                };
                out += &bits_line(&res.with_context(|| format!("line {}", i + 1))?);
                out.push('\n');
            }
            write_file(&output, &out)?;
        }
        Command::Encode {
            code,
            shaping: sargs,
            input,
            output,
            trace,
        } => {
            let code = load_code(&code)?;
            let spec = build_spec(&code, &sargs)?;
            let graph = shaping::build_shaping_graph(&code, &spec)?;
            let (mut out, mut tr) = (String::new(), String::new());
            for (i, v) in read_bit_lines(&input)?.iter().enumerate() {
                let res = shaping::shape_encode(&code, &graph, v).with_context(|| format!("line {}", i + 1))?;
                out += &bits_line(&res.codeword);
                out.push('\n');
                for s in &res.trace {
                    tr += &format!("{} {} {} {} {}\n", i, s.position, s.tilde, s.bit, s.guess as u8);
                }
            }
            write_file(&output, &out)?;
            if let Some(t) = trace {
                write_file(&t, &tr)?;
            }
        }
        Command::Decode {
            code,
            shaping: sargs,
            input,
            output,
            max_iter,
        } => {
            let code = load_code(&code)?;
            let spec = build_spec(&code, &sargs)?;
            let graph = shaping::build_shaping_graph(&code, &spec)?;
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let llr = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().with_context(|| format!("bad LLR `{t}`")))
                .collect::<Result<Vec<_>>>()?;
            let res = BpDecoder::new(code.h()).decode(&llr, max_iter)?;
            let msg = graph.extract_message(&code.extract_systematic(&res.hard_bits));
            write_file(&output, &(bits_line(&msg) + "\n"))?;
            writeln!(out, "converged {}", res.converged)?;
            writeln!(out, "iterations {}", res.iterations_used)?;
        }
        Command::Capacity { rate, dist, code_rate } => {
            if !(rate > 0.0 && rate < 1.0) {
                bail!("--rate must lie in (0, 1)");
            }
            let snr = match dist.as_str() {
                "uniform" => info::snr_for_rate(|g| info::mi_ook(0.5, g), rate)?,
                "optimal" => info::snr_for_rate(|g| info::capacity_ook(g).0, rate)?,
                "ts" => info::snr_for_rate(|g| info::ts_capacity(code_rate, g).0, rate)?,
                d => match d.strip_prefix("classes=") {
                    Some(list) => {
                        let spec = parse_classes(list)?;
                        info::snr_for_rate(|g| info::ts_rate(&spec, g), rate)?
                    }
                    None => bail!("unknown --dist `{d}`"),
                },
            };
            writeln!(out, "{snr:.4}")?;
        }
        Command::Simulate {
            config,
            overrides,
            seed,
            workers,
            output,
        } => {
            let mut cfg = SimConfig::load(&config).map_err(|e| anyhow::anyhow!("{}: {e}", config.display()))?;
            let here = std::env::current_dir()?;
            for o in &overrides {
                let (k, v) = o.split_once('=').with_context(|| format!("bad --set `{o}`"))?;
                cfg.apply(k.trim(), v.trim(), &here)?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let records = Campaign::prepare(&cfg)?.run()?;
            match output {
                Some(p) => {
                    let f = fs::File::create(&p).with_context(|| format!("writing {}", p.display()))?;
                    sim::write_csv(std::io::BufWriter::new(f), &records)?;
                }
                None => {
                    sim::write_csv(&mut out, &records)?;
                    out.flush()?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
