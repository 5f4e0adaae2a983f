//! Command-line front end.
//!
//! Settings resolve as command-line flags, then the `--config` file, then
//! built-in defaults. The config file is flat `key = value` lines whose keys
//! are the long flag names (`J`, `B`, `T`, `t-min`, `points`, ...); `#`
//! starts a comment.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{build_step_unitaries, QuantumSampler};
use crate::classical::{statistical_complexity, EpsilonMachine};
use crate::error::{Error, Result};
use crate::ising::{transition_matrix, IsingParams, Spin};
use crate::quantum::{build_quantum_model, find_tmax};
use crate::sweep::{self, Spacing, SweepRow};
use crate::verify::{self, Level};

pub const THREADS_ENV: &str = "SPIN_EPSILON_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "spin-epsilon",
    version,
    about = "Classical and quantum statistical complexity of the 1D Ising chain"
)]
pub struct Cli {
    /// Flat key = value file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// C_mu and C_q at a single (J, B, T).
    Complexity(ComplexityArgs),
    /// Both complexities over a temperature grid, as CSV or JSON.
    Sweep(SweepArgs),
    /// Stream sampled spins from the classical or quantum machine.
    Simulate(SimulateArgs),
    /// Temperature at which C_q peaks.
    Tmax(TmaxArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    /// Coupling strength.
    #[arg(long = "J", allow_negative_numbers = true)]
    pub j: Option<f64>,
    /// External field.
    #[arg(long = "B", allow_negative_numbers = true)]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Classical,
    Quantum,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Temperature (k_B = 1).
    #[arg(long = "T", allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Use the T -> infinity limit (beta = 0) instead of --T.
    #[arg(long)]
    pub infinite_temperature: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long = "T", allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial causal state: +1/up or -1/down.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TmaxArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub level: Option<Level>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write oracle CSVs (marginals, conditional tables, convergence) here.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Flat `key = value` settings.
#[derive(Debug, Default, Clone)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("config line {}: expected key = value", n + 1))
            })?;
            values.insert(k.trim().to_string(), v.trim().trim_matches('"').to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    Error::InvalidInput(format!("config key {key}: cannot parse {v:?}"))
                })
            })
            .transpose()
    }

    fn get_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                T::from_str(v, true)
                    .map_err(|_| Error::InvalidInput(format!("config key {key}: unknown value {v:?}")))
            })
            .transpose()
    }

    /// Flag value, else config value, else default.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    fn resolve_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get_enum(key)?.unwrap_or(default)),
        }
    }

    fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

pub const DEFAULT_J: f64 = 1.0;
pub const DEFAULT_B: f64 = 0.3;
pub const DEFAULT_T: f64 = 2.0;
pub const DEFAULT_T_MIN: f64 = 0.05;
pub const DEFAULT_T_MAX: f64 = 100.0;
pub const DEFAULT_POINTS: usize = 200;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-4;

/// Parses `+1`, `1`, `up` as [`Spin::Up`] and `-1`, `down` as [`Spin::Down`].
pub fn parse_spin(s: &str) -> Result<Spin> {
    match s.trim().to_ascii_lowercase().as_str() {
        "+1" | "1" | "up" | "+" => Ok(Spin::Up),
        "-1" | "down" | "-" => Ok(Spin::Down),
        other => Err(Error::InvalidInput(format!("unknown start state {other:?}"))),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn chain(cfg: &Config, args: &ChainArgs) -> Result<(f64, f64)> {
    Ok((
        cfg.resolve(args.j, "J", DEFAULT_J)?,
        cfg.resolve(args.b, "B", DEFAULT_B)?,
    ))
}

fn cmd_complexity(cfg: &Config, args: &ComplexityArgs) -> Result<u8> {
    let (j, b) = chain(cfg, &args.chain)?;
    let infinite = args.infinite_temperature || cfg.get::<bool>("infinite-temperature")?.unwrap_or(false);
    let params = if infinite {
        IsingParams::infinite_temperature(j, b)?
    } else {
        IsingParams::new(j, b, cfg.resolve(args.t, "T", DEFAULT_T)?)?
    };
    let row = SweepRow::compute(&params);
    row.check_invariant()?;
    let mut out = open_out(None)?;
    match cfg.resolve_enum(args.format, "format", Format::Text)? {
        Format::Csv => sweep::write_csv(&[row], &mut out)?,
        Format::Json => {
            serde_json::to_writer(&mut out, &row)?;
            writeln!(out)?;
        }
        Format::Text => {
            writeln!(out, "J = {}  B = {}  T = {}", row.j, row.b, row.t)?;
            writeln!(out, "stationary p = ({}, {})", row.p0, row.p1)?;
            writeln!(
                out,
                "transitions  T00 = {}  T01 = {}  T10 = {}  T11 = {}",
                row.t00, row.t01, row.t10, row.t11
            )?;
            writeln!(out, "overlap <s0|s1> = {}", row.fidelity)?;
            writeln!(out, "C_mu = {} bits", row.c_mu)?;
            writeln!(out, "C_q  = {} bits", row.c_q)?;
            match row.ratio {
                Some(r) => writeln!(out, "C_mu / C_q = {r}")?,
                None => writeln!(out, "C_mu / C_q undefined (C_q = 0)")?,
            }
            serde_json::to_writer(&mut out, &row)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

fn cmd_sweep(cfg: &Config, args: &SweepArgs) -> Result<u8> {
    let (j, b) = chain(cfg, &args.chain)?;
    let t_min = cfg.resolve(args.t_min, "t-min", DEFAULT_T_MIN)?;
    let t_max = cfg.resolve(args.t_max, "t-max", DEFAULT_T_MAX)?;
    let points = cfg.resolve(args.points, "points", DEFAULT_POINTS)?;
    let spacing = cfg.resolve_enum(args.spacing, "spacing", Spacing::Log)?;
    let out_path = cfg.resolve_opt(args.out.clone(), "out")?;

    let temps = sweep::temperature_grid(t_min, t_max, points, spacing)?;
    let rows = sweep::sweep_rows(j, b, &temps)?;
    let mut out = open_out(out_path.as_deref())?;
    match cfg.resolve_enum(args.format, "format", Format::Csv)? {
        Format::Json => sweep::write_json(&rows, &mut out)?,
        Format::Csv | Format::Text => sweep::write_csv(&rows, &mut out)?,
    }
    out.flush()?;
    if let Some(best) = sweep::argmax_cq(&rows) {
        eprintln!(
            "grid argmax of C_q: T = {} (C_q = {} bits, C_mu = {} bits)",
            best.t, best.c_q, best.c_mu
        );
    }
    Ok(EXIT_OK)
}

/// Writes `steps` symbols as one space-separated line; nothing at all for 0 steps.
fn stream_symbols<W: Write>(out: &mut W, steps: usize, mut next: impl FnMut() -> Spin) -> Result<()> {
    for k in 0..steps {
        if k > 0 {
            out.write_all(b" ")?;
        }
        out.write_all(next().as_str().as_bytes())?;
    }
    if steps > 0 {
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn cmd_simulate(cfg: &Config, args: &SimulateArgs) -> Result<u8> {
    let (j, b) = chain(cfg, &args.chain)?;
    let params = IsingParams::new(j, b, cfg.resolve(args.t, "T", DEFAULT_T)?)?;
    let backend = cfg.resolve_enum(args.backend, "backend", Backend::Classical)?;
    let steps = cfg.resolve(args.steps, "steps", DEFAULT_STEPS)?;
    let seed = cfg.resolve(args.seed, "seed", DEFAULT_SEED)?;
    let start = match cfg.resolve_opt(args.start.clone(), "start")? {
        Some(s) => parse_spin(&s)?,
        None => Spin::Up,
    };
    let out_path = cfg.resolve_opt(args.out.clone(), "out")?;

    let tm = transition_matrix(&params);
    let mut out = open_out(out_path.as_deref())?;
    match backend {
        Backend::Classical => {
            let mut machine = EpsilonMachine::new(tm, start);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            stream_symbols(&mut out, steps, || machine.step(&mut rng))?;
        }
        Backend::Quantum => {
            let su = build_step_unitaries(&build_quantum_model(&tm));
            let mut sampler = QuantumSampler::new(su, start, seed);
            stream_symbols(&mut out, steps, || sampler.step())?;
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct TmaxReport {
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "B")]
    b: f64,
    t_max: f64,
    c_q_bits: f64,
    c_mu_bits: f64,
    interior: bool,
    unimodal: bool,
}

fn cmd_tmax(cfg: &Config, args: &TmaxArgs) -> Result<u8> {
    let (j, b) = chain(cfg, &args.chain)?;
    let lo = cfg.resolve(args.t_min, "t-min", DEFAULT_T_MIN)?;
    let hi = cfg.resolve(args.t_max, "t-max", DEFAULT_T_MAX)?;
    let tol = cfg.resolve(args.tol, "tol", DEFAULT_TOL)?;
    let r = find_tmax(j, b, (lo, hi), tol)?;
    let c_mu = statistical_complexity(&transition_matrix(&IsingParams::new(j, b, r.t_max)?));
    let report = TmaxReport {
        j,
        b,
        t_max: r.t_max,
        c_q_bits: r.c_q_max,
        c_mu_bits: c_mu,
        interior: r.interior,
        unimodal: r.unimodal,
    };
    if !r.unimodal {
        eprintln!("warning: C_q profile is not unimodal on the scan grid; reporting the grid argmax");
    }
    let mut out = open_out(None)?;
    match cfg.resolve_enum(args.format, "format", Format::Text)? {
        Format::Json => {
            serde_json::to_writer(&mut out, &report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["J", "B", "T_max", "C_q_bits", "C_mu_bits", "interior"])?;
            w.write_record([
                sweep::fmt_f64(j),
                sweep::fmt_f64(b),
                sweep::fmt_f64(r.t_max),
                sweep::fmt_f64(r.c_q_max),
                sweep::fmt_f64(c_mu),
                r.interior.to_string(),
            ])?;
            w.flush()?;
        }
        Format::Text => {
            if r.interior {
                writeln!(out, "interior maximum of C_q in [{lo}, {hi}]")?;
            } else {
                writeln!(out, "boundary result: no interior maximum of C_q in [{lo}, {hi}]")?;
            }
            writeln!(out, "T_max = {}", r.t_max)?;
            writeln!(out, "C_q(T_max) = {} bits", r.c_q_max)?;
            writeln!(out, "C_mu(T_max) = {c_mu} bits")?;
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

fn cmd_verify(cfg: &Config, args: &VerifyArgs) -> Result<u8> {
    let level = cfg.resolve_enum(args.level, "level", Level::Quick)?;
    let seed = cfg.resolve(args.seed, "seed", DEFAULT_SEED)?;
    let report = verify::run(level, seed)?;
    let mut out = open_out(None)?;
    match cfg.resolve_enum(args.format, "format", Format::Text)? {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        Format::Text | Format::Csv => {
            for c in &report.checks {
                writeln!(out, "{c}")?;
            }
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            writeln!(out, "{verdict} verify level={level:?} seed={seed}")?;
        }
    }
    out.flush()?;
    if let Some(dir) = cfg.resolve_opt(args.dump_dir.clone(), "dump-dir")? {
        verify::dump_oracle(&dir, level)?;
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

/// Dispatches a parsed command line, returning the process exit code.
pub fn execute(cli: &Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let pool = thread_pool()?;
    pool.install(|| match &cli.command {
        Command::Complexity(a) => cmd_complexity(&cfg, a),
        Command::Sweep(a) => cmd_sweep(&cfg, a),
        Command::Simulate(a) => cmd_simulate(&cfg, a),
        Command::Tmax(a) => cmd_tmax(&cfg, a),
        Command::Verify(a) => cmd_verify(&cfg, a),
    })
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Invariant(_) => EXIT_VERIFY_FAILED,
                _ => EXIT_USAGE,
            })
        }
    }
}
