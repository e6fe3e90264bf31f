use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use repnum::benchmarks::{Builtin, BuiltinParams};
use repnum::model::Route;
use repnum::{NodeFamily, OperatorOrder, SplittingSpec};

#[derive(Debug, Parser)]
#[command(
    name = "repnum",
    version,
    about = "Reproduction numbers of age-structured epidemic models by pseudospectral collocation",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute R_N for one or more N.
    Compute(Common),
    /// Convergence sweep over a list of N, written as CSV.
    Sweep(SweepArgs),
    /// R_N over a (nu, theta) grid of the HBV model.
    Scan(ScanArgs),
    /// Sample the dominant eigenfunction y and its density x = y'.
    Eigenfunction(EigenArgs),
    /// Write B, M and the collocation nodes as CSV files into a directory.
    DumpMatrices(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Zeros,
    Extrema,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderingArg {
    BmInv,
    MinvB,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplittingArg {
    #[value(name = "R0", alias = "r0")]
    R0,
    #[value(name = "T_H", alias = "th")]
    Th,
    #[value(name = "T_V", alias = "tv")]
    Tv,
}

#[derive(Debug, Args)]
struct Common {
    /// Built-in model: example1-analytic, example1-smooth, example1-w3, example2, hbv.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    builtin: Option<String>,
    /// TOML model file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Collocation nodes per piece: a single value or start:step:stop.
    #[arg(long = "N", value_name = "N", default_value = "40")]
    n: String,
    #[arg(long, value_enum, default_value = "zeros")]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "bm-inv")]
    ordering: OrderingArg,
    /// Which inflows count as births. Overrides the config file's choice.
    #[arg(long, value_enum)]
    splitting: Option<SplittingArg>,
    /// Split [0, a†] into this many equal pieces (model breakpoints are always added).
    #[arg(long, default_value_t = 1)]
    pieces: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Example 1 q(a).
    #[arg(long)]
    q: Option<String>,
    #[arg(long = "a-dagger")]
    a_dagger: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Example 2 exponent.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Fitting window as lo:hi (inclusive); defaults to the last half of the N list.
    #[arg(long)]
    window: Option<String>,
    /// Reference value; defaults to the model's known value or a run at twice the largest N.
    #[arg(long)]
    reference: Option<f64>,
    /// Fill runtime_ms instead of writing NA.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// nu values as start:step:stop.
    #[arg(long = "nu-grid")]
    nu_grid: Option<String>,
    #[arg(long = "theta-grid")]
    theta_grid: Option<String>,
    /// Uniform points on [0, 1] for grids not given explicitly.
    #[arg(long = "grid-points", default_value_t = 11)]
    grid_points: usize,
}

#[derive(Debug, Args)]
struct EigenArgs {
    #[command(flatten)]
    common: Common,
    /// Number of uniform sample ages.
    #[arg(long, default_value_t = 201)]
    points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Compute,
    Sweep,
    Scan,
    Eigenfunction,
    DumpMatrices,
}

#[derive(Debug, Clone)]
pub enum ModelSource {
    Builtin(Builtin, BuiltinParams),
    Config(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub command: CommandKind,
    pub source: ModelSource,
    pub ns: Vec<usize>,
    pub family: NodeFamily,
    pub ordering: OperatorOrder,
    pub splitting: Option<SplittingSpec>,
    pub pieces: usize,
    pub output: Option<PathBuf>,
    pub window: Option<(usize, usize)>,
    pub reference: Option<f64>,
    pub timing: bool,
    pub nu_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    pub points: usize,
}

/// Usage problems found after clap has accepted the command line.
#[derive(Debug)]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Parses `N` or `start:step:stop` (inclusive).
pub fn parse_n_list(s: &str) -> Result<Vec<usize>, UsageError> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("invalid N `{t}`")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let ns = match parts.as_slice() {
        [one] => vec![parse(one)?],
        [start, step, stop] => {
            let (start, step, stop) = (parse(start)?, parse(step)?, parse(stop)?);
            if step == 0 || start > stop {
                return Err(usage(format!("empty N range `{s}`")));
            }
            (start..=stop).step_by(step).collect()
        }
        _ => return Err(usage(format!("N must be a number or start:step:stop, got `{s}`"))),
    };
    if ns.contains(&0) {
        return Err(usage("N must be at least 1"));
    }
    Ok(ns)
}

/// Parses `start:step:stop` over reals, inclusive of `stop` up to rounding.
pub fn parse_real_grid(s: &str) -> Result<Vec<f64>, UsageError> {
    let vals: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("invalid grid value `{t}`"))))
        .collect::<Result<_, _>>()?;
    match vals.as_slice() {
        [v] => Ok(vec![*v]),
        &[start, step, stop] => {
            if step.is_nan() || step <= 0.0 || start > stop {
                return Err(usage(format!("empty grid `{s}`")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(usage(format!("grid must be start:step:stop, got `{s}`"))),
    }
}

fn uniform_unit(points: usize) -> Result<Vec<f64>, UsageError> {
    match points {
        0 => Err(usage("--grid-points must be positive")),
        1 => Ok(vec![0.0]),
        p => Ok((0..p).map(|i| i as f64 / (p - 1) as f64).collect()),
    }
}

fn parse_window(s: &str) -> Result<(usize, usize), UsageError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("window must be lo:hi, got `{s}`")))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| usage(format!("invalid window bound `{t}`")));
    let (lo, hi) = (p(lo)?, p(hi)?);
    if lo > hi {
        return Err(usage(format!("empty window `{s}`")));
    }
    Ok((lo, hi))
}

fn resolve(command: CommandKind, c: Common) -> Result<RunRequest, UsageError> {
    let source = match (c.builtin, c.config) {
        (Some(name), None) => {
            let which = Builtin::from_name(&name).ok_or_else(|| {
                let names: Vec<_> = Builtin::ALL.iter().map(|b| b.name()).collect();
                usage(format!("unknown builtin `{name}` (expected one of {})", names.join(", ")))
            })?;
            ModelSource::Builtin(
                which,
                BuiltinParams {
                    q: c.q,
                    a_dagger: c.a_dagger,
                    gamma: c.gamma,
                    k: c.k,
                    theta: c.theta,
                    nu: c.nu,
                },
            )
        }
        (None, Some(path)) => {
            let overrides = [
                ("q", c.q.is_some()),
                ("a-dagger", c.a_dagger.is_some()),
                ("gamma", c.gamma.is_some()),
                ("k", c.k.is_some()),
                ("theta", c.theta.is_some()),
                ("nu", c.nu.is_some()),
            ];
            if let Some((flag, _)) = overrides.iter().find(|(_, set)| *set) {
                return Err(usage(format!("--{flag} only applies to built-in models")));
            }
            ModelSource::Config(path)
        }
        _ => return Err(usage("give exactly one of --builtin and --config")),
    };
    if c.pieces == 0 {
        return Err(usage("--pieces must be at least 1"));
    }
    Ok(RunRequest {
        command,
        source,
        ns: parse_n_list(&c.n)?,
        family: match c.family {
            FamilyArg::Zeros => NodeFamily::ZerosPlusLeftEndpoint,
            FamilyArg::Extrema => NodeFamily::Extrema,
        },
        ordering: match c.ordering {
            OrderingArg::BmInv => OperatorOrder::BMinv,
            OrderingArg::MinvB => OperatorOrder::MinvB,
        },
        splitting: c.splitting.map(|s| match s {
            SplittingArg::R0 => SplittingSpec::R0,
            SplittingArg::Th => SplittingSpec::TypeReproduction(Route::Horizontal),
            SplittingArg::Tv => SplittingSpec::TypeReproduction(Route::Vertical),
        }),
        pieces: c.pieces,
        output: c.output,
        window: None,
        reference: None,
        timing: false,
        nu_grid: Vec::new(),
        theta_grid: Vec::new(),
        points: 0,
    })
}

/// Outcome of parsing: a request, or a clap result (help, version, usage error).
pub enum Parsed {
    Run(Box<RunRequest>),
    Clap(clap::Error),
    Usage(UsageError),
}

pub fn parse_args<I, T>(argv: I) -> Parsed
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => return Parsed::Clap(e),
    };
    let out = match cli.command {
        Command::Compute(c) => resolve(CommandKind::Compute, c),
        Command::DumpMatrices(c) => resolve(CommandKind::DumpMatrices, c).and_then(|r| {
            if r.output.is_none() {
                return Err(usage("dump-matrices needs --output <dir>"));
            }
            if r.ns.len() != 1 {
                return Err(usage("dump-matrices takes a single N"));
            }
            Ok(r)
        }),
        Command::Sweep(s) => resolve(CommandKind::Sweep, s.common).and_then(|mut r| {
            r.window = s.window.as_deref().map(parse_window).transpose()?;
            r.reference = s.reference;
            r.timing = s.timing;
            Ok(r)
        }),
        Command::Scan(s) => resolve(CommandKind::Scan, s.common).and_then(|mut r| {
            if r.ns.len() != 1 {
                return Err(usage("scan takes a single N"));
            }
            r.nu_grid = match &s.nu_grid {
                Some(g) => parse_real_grid(g)?,
                None => uniform_unit(s.grid_points)?,
            };
            r.theta_grid = match &s.theta_grid {
                Some(g) => parse_real_grid(g)?,
                None => uniform_unit(s.grid_points)?,
            };
            Ok(r)
        }),
        Command::Eigenfunction(e) => resolve(CommandKind::Eigenfunction, e.common).and_then(|mut r| {
            if r.ns.len() != 1 {
                return Err(usage("eigenfunction takes a single N"));
            }
            if e.points < 2 {
                return Err(usage("--points must be at least 2"));
            }
            r.points = e.points;
            Ok(r)
        }),
    };
    match out {
        Ok(r) => Parsed::Run(Box::new(r)),
        Err(e) => Parsed::Usage(e),
    }
}
