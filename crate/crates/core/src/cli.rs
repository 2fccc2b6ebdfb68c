//! Command-line driver: `moments`, `variance`, `mc`, `sweep` and `fit`.
//!
//! Every flag may also be given in a `key=value` file passed with
//! `--config` (keys are the long flag names without dashes, `#` starts a
//! comment); flags on the command line win.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use crate::ensemble::Window;
use crate::fock::{build_observable, ratio_to_f64, MomentTable, TwoModeSpace};
use crate::scaling::{
    analytic_coefficients, exact_case_variance, fit_expansion, scaling_sweep, DEFAULT_FIT_K, DEFAULT_FIT_N,
};
use crate::typicality::{exact_total_variance, mc_decomposition, FluctuationReport, Ratio};
use crate::Error;

/// Seed used when neither `--seed` nor a config file provides one.
pub const DEFAULT_SEED: u64 = 20_110_711;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_MOMENT_P_MAX: u32 = 12;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "typicality", version, about = "Typicality of collective observables in a two-mode Bose gas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// key=value file with default flag values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Rayon worker threads; results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    fn delimiter(self) -> &'static str {
        match self {
            Format::Csv => ",",
            Format::Tsv => "\t",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact oscillator moments <φ_i|x^p|φ_j> for p = 0..p_max
    Moments(MomentsArgs),
    /// Exact mean, total variance and δ/X̄ of X_2ν on one window
    Variance(CaseArgs),
    /// Monte Carlo split δ² = δ_s² + δ_q² against the exact δ²
    Mc(McArgs),
    /// Relative fluctuation for n = 2k+1, k = round(c·N^α/2), over a list of N
    Sweep(SweepArgs),
    /// Least-squares fit of δ² on {N²/4, n², N, 1}
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long = "p-max")]
    pub p_max: Option<u32>,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    #[arg(long)]
    pub nu: Option<u32>,
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub nu: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "N-list")]
    pub n_list: Option<String>,
    /// Add a Monte Carlo δ² column with this many samples per row
    #[arg(long)]
    pub mc: Option<usize>,
    /// Write (ln N, ln δ/X̄) pairs to this file
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub nu: Option<u32>,
    #[arg(long = "N-list")]
    pub n_list: Option<String>,
    #[arg(long = "k-list")]
    pub k_list: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    /// Argument parsing failed, or help/version was requested.
    Clap(clap::Error),
    Usage(String),
    Capacity(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Capacity(_) => EXIT_CAPACITY,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn usage(flag: &str, msg: impl fmt::Display) -> Self {
        CliError::Usage(format!("--{flag}: {msg}"))
    }

    /// Attributes a library error to the flag that caused it.
    fn from_library(err: Error) -> Self {
        let flag = match &err {
            Error::Capacity { .. } => return CliError::Capacity(format!("--nu/--p-max: {err}")),
            Error::OddParticleNumber(_) => "N",
            Error::WindowTooWide { .. } => "k",
            Error::TooFewSamples { .. } => "samples",
            Error::DegenerateGrid(_) => "N-list/--k-list",
            Error::InvalidParameter { name, .. } => name,
            Error::InvalidMode(_) => "i/--j",
            _ => return CliError::Usage(err.to_string()),
        };
        CliError::usage(flag, err)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Capacity(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::from_library(err)
    }
}

/// Values read from a `--config` file.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

const CONFIG_KEYS: &[&str] = &[
    "nu", "N", "N-list", "k", "k-list", "alpha", "c", "samples", "seed", "out", "format", "i", "j", "p-max", "mc",
    "plot", "threads",
];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage("config", format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim().trim_start_matches("--");
            if !CONFIG_KEYS.contains(&key) {
                return Err(CliError::usage("config", format!("line {}: unknown key {key:?}", lineno + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The flag value if given, else the parsed config value.
    fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::usage(key, format!("{v:?}: {e}"))))
            .transpose()
    }

    fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.pick(flag, key)?.ok_or_else(|| CliError::usage(key, "required"))
    }
}

/// Formats like C's `%.10g`: ten significant digits, trailing zeros
/// dropped, scientific notation outside `[1e-5, 1e10)`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: usize = 10;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    if !(-5..DIGITS as i32).contains(&exp) {
        let mut m = format!("{}.{}", &digits[..1], &digits[1..]);
        trim_fraction(&mut m);
        return format!("{sign}{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let mut out = if exp >= 0 {
        let int_len = exp as usize + 1;
        format!("{}.{}", &digits[..int_len], &digits[int_len..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    trim_fraction(&mut out);
    format!("{sign}{out}")
}

fn trim_fraction(s: &mut String) {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
}

fn format_ratio(r: Ratio) -> String {
    r.value().map(format_sig).unwrap_or_else(|| "undefined".into())
}

/// Parses a comma-separated list of non-negative integers; entries such as
/// `1e6` are accepted when they are whole numbers.
fn parse_list(flag: &str, text: &str) -> Result<Vec<u64>, CliError> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::usage(flag, "empty list"));
    }
    items
        .iter()
        .map(|item| {
            if let Ok(v) = item.parse::<u64>() {
                return Ok(v);
            }
            match item.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 => Ok(v as u64),
                _ => Err(CliError::usage(flag, format!("{item:?} is not a non-negative integer"))),
            }
        })
        .collect()
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub table: String,
    /// `(path, contents)` of the optional plot-data file.
    pub plot: Option<(PathBuf, String)>,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> String {
        let d = format.delimiter();
        let mut out = self.header.join(d);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(d));
            out.push('\n');
        }
        out
    }
}

struct Context {
    config: ConfigFile,
    format: Format,
    seed: u64,
}

/// Parses arguments and runs the command without touching the filesystem
/// beyond reading `--config`.
pub fn execute<I, T>(args: I) -> Result<(Output, Option<PathBuf>), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Clap)?;
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let format = config.pick(cli.format, "format")?.unwrap_or(Format::Csv);
    let seed = config.pick(cli.seed, "seed")?.unwrap_or(DEFAULT_SEED);
    let out = config.pick(cli.out.clone(), "out")?;
    let threads = config.pick(cli.threads, "threads")?;
    let ctx = Context { config, format, seed };

    let run = || match &cli.command {
        Command::Moments(a) => cmd_moments(&ctx, a),
        Command::Variance(a) => cmd_variance(&ctx, a),
        Command::Mc(a) => cmd_mc(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Fit(a) => cmd_fit(&ctx, a),
    };
    let output = match threads {
        Some(0) => return Err(CliError::usage("threads", "must be positive")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::usage("threads", e))?
            .install(run)?,
        None => run()?,
    };
    Ok((output, out))
}

/// Runs the CLI, writing to `--out` or stdout; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = execute(args).and_then(|(output, out)| {
        if let Some((path, text)) = &output.plot {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("--plot: {}: {e}", path.display())))?;
        }
        match out {
            Some(path) => std::fs::write(&path, &output.table)
                .map_err(|e| CliError::Io(format!("--out: {}: {e}", path.display()))),
            None => {
                print!("{}", output.table);
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_moments(ctx: &Context, a: &MomentsArgs) -> Result<Output, CliError> {
    let c = &ctx.config;
    let p_max = c.pick(a.p_max, "p-max")?.unwrap_or(DEFAULT_MOMENT_P_MAX);
    let i = c.pick(a.i, "i")?;
    let j = c.pick(a.j, "j")?;
    let pairs: Vec<(usize, usize)> = match (i, j) {
        (Some(i), Some(j)) => vec![(i, j)],
        (Some(i), None) => vec![(i, 0), (i, 1)],
        (None, Some(j)) => vec![(0, j), (1, j)],
        (None, None) => vec![(0, 0), (0, 1), (1, 0), (1, 1)],
    };
    let table_moments = MomentTable::default();
    let mut table = Table::new(vec!["i", "j", "p", "exact", "value"]);
    for (i, j) in pairs {
        for p in 0..=p_max {
            let m = table_moments.moment(i, j, p).map_err(|e| match e {
                Error::Capacity { .. } => CliError::Capacity(format!("--p-max: {e}")),
                other => CliError::from(other),
            })?;
            table.push(vec![i.to_string(), j.to_string(), p.to_string(), m.to_string(), format_sig(m.to_f64())]);
        }
    }
    Ok(Output { table: table.render(ctx.format), plot: None })
}

fn case_inputs(ctx: &Context, a: &CaseArgs) -> Result<(u32, u64, u64), CliError> {
    let c = &ctx.config;
    Ok((c.pick(a.nu, "nu")?.unwrap_or(1), c.require(a.n, "N")?, c.require(a.k, "k")?))
}

fn cmd_variance(ctx: &Context, a: &CaseArgs) -> Result<Output, CliError> {
    let (nu, n, k) = case_inputs(ctx, a)?;
    let v = exact_case_variance(nu, n, k)?;
    let mut table = Table::new(vec!["nu", "N", "n", "mean", "delta_sq", "ratio"]);
    table.push(vec![
        nu.to_string(),
        n.to_string(),
        (2 * k + 1).to_string(),
        format_sig(ratio_to_f64(&v.mean)),
        format_sig(ratio_to_f64(&v.delta_sq)),
        format_ratio(v.ratio()),
    ]);
    Ok(Output { table: table.render(ctx.format), plot: None })
}

fn monte_carlo(nu: u32, n: u64, k: u64, samples: usize, seed: u64) -> Result<(FluctuationReport, BigRational), CliError> {
    if nu == 0 {
        return Err(CliError::usage("nu", "must be at least 1"));
    }
    let moment = MomentTable::default().matrix(2 * nu)?;
    let space = TwoModeSpace::new(n)?;
    let window = Window::new(space, k)?;
    let obs = build_observable(space, moment)?;
    let exact = exact_total_variance(&window, &obs)?.exact.expect("exact report").delta_sq;
    let report = mc_decomposition(&window, &obs, seed, samples)?;
    Ok((report, exact))
}

fn z_score(estimate: f64, exact: f64, stderr: f64) -> f64 {
    let diff = estimate - exact;
    if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

fn cmd_mc(ctx: &Context, a: &McArgs) -> Result<Output, CliError> {
    let (nu, n, k) = case_inputs(ctx, &a.case)?;
    let samples = ctx.config.pick(a.samples, "samples")?.unwrap_or(DEFAULT_SAMPLES);
    if samples < 100 {
        return Err(CliError::usage("samples", format!("need at least 100 samples, got {samples}")));
    }
    let (r, exact) = monte_carlo(nu, n, k, samples, ctx.seed)?;
    let err = r.mc_stderr.expect("monte carlo errors");
    let exact = ratio_to_f64(&exact);
    let mut table = Table::new(vec![
        "nu",
        "N",
        "n",
        "samples",
        "seed",
        "mean",
        "delta_s_sq",
        "delta_q_sq",
        "delta_sq",
        "exact_delta_sq",
        "z_score",
        "stderr_mean",
        "stderr_s",
        "stderr_q",
        "stderr_sum",
    ]);
    table.push(vec![
        nu.to_string(),
        n.to_string(),
        (2 * k + 1).to_string(),
        samples.to_string(),
        ctx.seed.to_string(),
        format_sig(r.mean),
        format_sig(r.delta_s_sq),
        format_sig(r.delta_q_sq),
        format_sig(r.delta_sq),
        format_sig(exact),
        format_sig(z_score(r.delta_sq, exact, err.delta_sq)),
        format_sig(err.mean),
        format_sig(err.delta_s_sq),
        format_sig(err.delta_q_sq),
        format_sig(err.delta_sq),
    ]);
    Ok(Output { table: table.render(ctx.format), plot: None })
}

fn cmd_sweep(ctx: &Context, a: &SweepArgs) -> Result<Output, CliError> {
    let c = &ctx.config;
    let nu = c.pick(a.nu, "nu")?.unwrap_or(1);
    let alpha = c.require(a.alpha, "alpha")?;
    let prefactor = c.pick(a.c, "c")?.unwrap_or(1.0);
    let list = c.require(a.n_list.clone(), "N-list")?;
    let ns = parse_list("N-list", &list)?;
    let mc = c.pick(a.mc, "mc")?;
    let plot = c.pick(a.plot.clone(), "plot")?;
    if let Some(s) = mc {
        if s < 100 {
            return Err(CliError::usage("mc", format!("need at least 100 samples, got {s}")));
        }
    }
    let sweep = scaling_sweep(nu, alpha, prefactor, &ns).map_err(|e| match e {
        Error::OddParticleNumber(_) => CliError::usage("N-list", e),
        other => CliError::from(other),
    })?;

    let mut header = vec!["nu", "N", "k", "n", "mean", "delta_sq", "ratio", "method"];
    if mc.is_some() {
        header.extend(["mc_delta_sq", "mc_stderr", "z_score"]);
    }
    let mut table = Table::new(header);
    let mut plot_text = String::new();
    for row in &sweep.rows {
        let mut cells = vec![
            row.nu.to_string(),
            row.particles.to_string(),
            row.half_width.to_string(),
            row.dimension.to_string(),
            format_sig(row.mean),
            format_sig(row.delta_sq),
            format_ratio(row.ratio),
            "exact".to_string(),
        ];
        if let Some(samples) = mc {
            let (r, _) = monte_carlo(nu, row.particles, row.half_width, samples, ctx.seed)?;
            let se = r.mc_stderr.expect("monte carlo errors").delta_sq;
            cells[7] = "exact+monte-carlo".to_string();
            cells.extend([format_sig(r.delta_sq), format_sig(se), format_sig(z_score(r.delta_sq, row.delta_sq, se))]);
        }
        table.push(cells);
        if let Some(ratio) = row.ratio.value().filter(|v| *v > 0.0) {
            plot_text.push_str(&format!("{} {}\n", format_sig((row.particles as f64).ln()), format_sig(ratio.ln())));
        }
    }
    Ok(Output { table: table.render(ctx.format), plot: plot.map(|p| (p, plot_text)) })
}

fn cmd_fit(ctx: &Context, a: &FitArgs) -> Result<Output, CliError> {
    let c = &ctx.config;
    let nu = c.pick(a.nu, "nu")?.unwrap_or(1);
    let ns = match c.pick(a.n_list.clone(), "N-list")? {
        Some(s) => parse_list("N-list", &s)?,
        None => DEFAULT_FIT_N.to_vec(),
    };
    let ks = match c.pick(a.k_list.clone(), "k-list")? {
        Some(s) => parse_list("k-list", &s)?,
        None => DEFAULT_FIT_K.to_vec(),
    };
    let exact = analytic_coefficients(nu)?;
    let fit = fit_expansion(nu, &ns, &ks)?;
    let mut table = Table::new(vec![
        "nu",
        "d20_fit",
        "d02_fit",
        "d20_exact",
        "d02_exact",
        "max_residual",
        "d20_exact_q",
        "d02_exact_q",
    ]);
    table.push(vec![
        nu.to_string(),
        format_sig(fit.d20),
        format_sig(fit.d02),
        format_sig(ratio_to_f64(&exact.d20)),
        format_sig(ratio_to_f64(&exact.d02)),
        format_sig(fit.max_residual),
        exact.d20.to_string(),
        exact.d02.to_string(),
    ]);
    Ok(Output { table: table.render(ctx.format), plot: None })
}
