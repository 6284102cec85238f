//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "quadrelax", version, about = "Quadrupolar relaxation of spin-7/2 nuclei")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write the report and one CSV per table into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Seed for the fit's random starts.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Print full precision instead of 4 significant figures.
    #[arg(long, global = true)]
    pub raw: bool,

    #[command(flatten)]
    pub physics: PhysicsArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct PhysicsArgs {
    /// Twice the spin quantum number (only 7 is supported).
    #[arg(long, global = true, value_name = "TWO_I")]
    pub spin: Option<u32>,

    /// Larmor frequency in Hz.
    #[arg(long, global = true, value_name = "HZ")]
    pub larmor_freq: Option<f64>,

    /// Quadrupolar frequency nu_Q in Hz; sets C = (2 pi nu_Q)^2 / 10.
    #[arg(long, global = true, value_name = "HZ")]
    pub quad_freq: Option<f64>,

    /// Rotational correlation time in seconds (Lorentzian densities).
    #[arg(long, global = true, value_name = "S")]
    pub correlation_time: Option<f64>,

    #[arg(long, global = true, value_name = "S")]
    pub j0: Option<f64>,
    #[arg(long, global = true, value_name = "S")]
    pub j1: Option<f64>,
    #[arg(long, global = true, value_name = "S")]
    pub j2: Option<f64>,

    /// Quadrupolar constant C in Hz^2, overriding --quad-freq.
    #[arg(long, global = true, value_name = "HZ2")]
    pub c: Option<f64>,

    #[arg(long, global = true, value_enum)]
    pub equilibrium: Option<EquilibriumKind>,

    /// Populations file used with `--equilibrium file`.
    #[arg(long, global = true, value_name = "PATH")]
    pub equilibrium_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum EquilibriumKind {
    PureTop,
    Uniform,
    HighTemperature,
    File,
}

impl EquilibriumKind {
    pub fn parse_key(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, false).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum InitialState {
    Noon,
    PureTop,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Decay,
    Recovery,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Relaxation rates and initial mode amplitudes per coherence order.
    Rates(RatesArgs),
    /// Density-matrix trajectory.
    Evolve(EvolveArgs),
    /// Joint Redfield fit of a longitudinal and a transverse curve.
    Fit(FitArgs),
    /// Mono-exponential fit of one curve.
    Bloch(BlochArgs),
    /// Regularized inverse Laplace transform of one curve.
    Ilt(IltArgs),
    /// Compare assembled blocks with the bundled coefficient tables.
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rates(_) => "rates",
            Command::Evolve(_) => "evolve",
            Command::Fit(_) => "fit",
            Command::Bloch(_) => "bloch",
            Command::Ilt(_) => "ilt",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RatesArgs {
    /// Coherence orders: `all` or a comma-separated list.
    #[arg(long, default_value = "all", value_parser = parse_orders)]
    pub q: Orders,

    /// Initial state used for the amplitude table.
    #[arg(long, value_enum, default_value = "noon")]
    pub state: InitialState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Orders {
    All,
    List(Vec<usize>),
}

impl Orders {
    pub fn resolve(&self, dim: usize) -> Vec<usize> {
        match self {
            Orders::All => (0..dim).collect(),
            Orders::List(v) => v.clone(),
        }
    }
}

fn parse_orders(s: &str) -> Result<Orders, String> {
    if s == "all" {
        return Ok(Orders::All);
    }
    let mut v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad coherence order '{t}'")))
        .collect::<Result<Vec<_>, _>>()?;
    v.sort_unstable();
    v.dedup();
    Ok(Orders::List(v))
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct EvolveArgs {
    #[arg(long, value_enum, default_value = "noon")]
    pub state: InitialState,

    /// Last time point in seconds.
    #[arg(long, value_name = "S")]
    pub t_max: f64,

    /// Number of equally spaced time points from 0 to t_max.
    #[arg(long, default_value_t = 200)]
    pub points: usize,

    /// Matrix elements as 1-based row/column digit pairs, e.g. 11,88,81.
    #[arg(long, value_delimiter = ',', value_parser = parse_element)]
    pub elements: Vec<(usize, usize)>,
}

fn parse_element(s: &str) -> Result<(usize, usize), String> {
    let d: Vec<u32> = s.trim().chars().map(|c| c.to_digit(10)).collect::<Option<_>>().ok_or(format!("bad element '{s}'"))?;
    match d.as_slice() {
        [r, c] if *r >= 1 && *c >= 1 => Ok((*r as usize, *c as usize)),
        _ => Err(format!("element '{s}' must be two digits, row then column, each 1-8")),
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct FitArgs {
    /// Longitudinal (inversion recovery) curve.
    #[arg(long, value_name = "PATH")]
    pub long: Option<PathBuf>,

    /// Transverse (echo decay) curve.
    #[arg(long, value_name = "PATH")]
    pub trans: Option<PathBuf>,

    /// Initial guess, e.g. `B0=80,B1=4`; unspecified values come from Bloch fits.
    #[arg(long)]
    pub init: Option<String>,

    /// Number of starts including the initial guess.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,

    /// Divide each curve by its largest magnitude before fitting.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct BlochArgs {
    #[arg(long, value_name = "PATH", conflicts_with = "trans")]
    pub long: Option<PathBuf>,

    #[arg(long, value_name = "PATH")]
    pub trans: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct IltArgs {
    #[arg(long, value_name = "PATH")]
    pub curve: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "decay")]
    pub kernel: KernelArg,

    #[arg(long, value_name = "S", default_value_t = 1e-4)]
    pub t_min: f64,

    #[arg(long, value_name = "S", default_value_t = 10.0)]
    pub t_max: f64,

    #[arg(long, default_value_t = 64)]
    pub points: usize,

    /// Tikhonov weight; chosen by the discrepancy principle when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
}

/// Parse an argument vector whose first element is the program name.
pub fn parse_invocation<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}
