//! Argument parsing and command dispatch for the `shiftspace` binary.

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use shiftspace::numerics::{read_table, Axis};
use shiftspace::oracle::compare;
use shiftspace::shiftspace::{best_approx_error_sq, project, Signal};
use shiftspace::spectral::{periodize, riesz_bounds};
use shiftspace::zak::{phi_field, verify_phi_properties, CheckOutcome};
use shiftspace::{Generator, Grid, SplineParams};

/// Exit status for numerical failures and failed validations.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for usage errors.
pub const EXIT_USAGE: i32 = 2;

/// Validation budgets are this multiple of the tolerance plus each check's
/// own quadrature and truncation estimates.
pub const VALIDATE_TOL_FACTOR: f64 = 100.0;

#[derive(Debug, Parser)]
#[command(
    name = "shiftspace",
    version,
    about = "Projections onto shift spaces and exact best-approximation errors",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Subcmd,
}

#[derive(Debug, Subcommand)]
enum Subcmd {
    /// Periodization D(y) on [-sigma, sigma] as CSV `y,D`.
    Dfun(Flags),
    /// Infimum and supremum of D with the Riesz classification.
    Riesz(Flags),
    /// Kernel Phi(x, y) on the fundamental cell as CSV `x,y,re,im`.
    Zak(Flags),
    /// Coefficients, symbol and error of the orthogonal projection of f.
    Project(Flags),
    /// Squared best-approximation error, optionally swept over sigma or rho.
    Besterr(Flags),
    /// Least-squares oracle residuals against the error formula.
    Compare(Flags),
    /// Residuals of the Phi identities against their budgets.
    Validate(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Generator: `bspline:m=<int>[,sigma=<r>]`, `gauss:width=<r>[,center=<r>,freq=<r>]`,
    /// `sinc[:sigma=<r>]` or `file:<path>`.
    #[arg(long = "gen", value_name = "SPEC")]
    generator: String,
    /// Function to approximate: a generator spec or `file:<path>`.
    #[arg(long = "f", value_name = "SPEC")]
    function: Option<String>,
    /// Shift parameter; shifts are spaced pi/sigma.
    #[arg(long)]
    sigma: Option<f64>,
    /// Band of the restricted space, 0 < rho <= sigma.
    #[arg(long)]
    rho: Option<f64>,
    /// Summation tolerance.
    #[arg(long, default_value_t = shiftspace::DEFAULT_TOL)]
    tol: f64,
    /// Nodes of the symbol and periodization grid on [-sigma, sigma].
    #[arg(long, default_value_t = shiftspace::shiftspace::DEFAULT_GRID_NODES)]
    dgrid: usize,
    /// Largest recovered shift index.
    #[arg(long, default_value_t = shiftspace::shiftspace::DEFAULT_J_RANGE)]
    jrange: usize,
    /// Cells per axis of the Phi grids.
    #[arg(long, default_value_t = 129)]
    res: usize,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Parameter sweep `<name>=<v1,v2,...>` with name sigma, rho or jrange.
    #[arg(long, value_name = "NAME=VALUES")]
    sweep: Option<String>,
}

/// Subcommand selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dfun,
    Riesz,
    Zak,
    Project,
    Besterr,
    Compare,
    Validate,
}

/// A generator specification; `sigma: None` follows the run's sigma.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Bspline { degree: usize, sigma: Option<f64> },
    Gauss { width: f64, center: f64, freq: f64 },
    Sinc { sigma: Option<f64> },
    File(PathBuf),
}

impl GenSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        if name == "file" {
            if rest.is_empty() {
                return Err("`file:` needs a path".into());
            }
            return Ok(GenSpec::File(PathBuf::from(rest)));
        }
        let mut pairs = Vec::new();
        for item in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("`{item}` in `{text}` is not key=value"))?;
            let v: f64 = v
                .parse()
                .map_err(|_| format!("`{v}` in `{text}` is not a number"))?;
            if !v.is_finite() {
                return Err(format!("`{item}` in `{text}` is not finite"));
            }
            pairs.push((k, v));
        }
        let allowed: &[&str] = match name {
            "bspline" => &["m", "sigma"],
            "gauss" => &["width", "center", "freq"],
            "sinc" => &["sigma"],
            _ => {
                return Err(format!(
                    "unknown generator `{name}` (expected bspline, gauss, sinc or file)"
                ))
            }
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(format!("unknown key `{k}` for `{name}`"));
        }
        let get = |key: &str| pairs.iter().rev().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let positive = |key: &str, v: Option<f64>| match v {
            Some(v) if v <= 0.0 => Err(format!("`{key}` must be positive in `{text}`")),
            other => Ok(other),
        };
        Ok(match name {
            "bspline" => {
                let m = get("m").ok_or_else(|| format!("`{text}` needs m=<degree>"))?;
                if m < 0.0 || m.fract() != 0.0 || m > 32.0 {
                    return Err(format!("degree m={m} must be an integer in 0..=32"));
                }
                GenSpec::Bspline {
                    degree: m as usize,
                    sigma: positive("sigma", get("sigma"))?,
                }
            }
            "gauss" => GenSpec::Gauss {
                width: positive("width", get("width"))?
                    .ok_or_else(|| format!("`{text}` needs width=<r>"))?,
                center: get("center").unwrap_or(0.0),
                freq: get("freq").unwrap_or(0.0),
            },
            _ => GenSpec::Sinc {
                sigma: positive("sigma", get("sigma"))?,
            },
        })
    }

    /// Sigma fixed by the spec itself.
    pub fn own_sigma(&self) -> Option<f64> {
        match self {
            GenSpec::Bspline { sigma, .. } | GenSpec::Sinc { sigma } => *sigma,
            _ => None,
        }
    }

    pub fn build(&self, sigma: f64) -> shiftspace::Result<Generator> {
        match self {
            GenSpec::Bspline { degree, sigma: s } => Ok(Generator::bspline(SplineParams::new(
                s.unwrap_or(sigma),
                *degree,
            )?)),
            GenSpec::Gauss {
                width,
                center,
                freq,
            } => Generator::gaussian_packet(*width, *center, *freq),
            GenSpec::Sinc { sigma: s } => Generator::bandlimited(s.unwrap_or(sigma)),
            GenSpec::File(path) => match read_table(path)? {
                (Axis::Time, samples) => {
                    let freq = Generator::sampled_frequency_grid(&samples)?;
                    Generator::sampled(&format!("file:{}", path.display()), samples, freq)
                }
                (Axis::Frequency, _) => Err(shiftspace::Error::Parse(format!(
                    "{}: generator files hold time samples (`x,re,im`)",
                    path.display()
                ))),
            },
        }
    }

    /// The spec read as a function to approximate.
    pub fn signal(&self, sigma: f64) -> shiftspace::Result<Signal> {
        match self {
            GenSpec::File(path) => Ok(match read_table(path)? {
                (Axis::Time, t) => Signal::Samples(t),
                (Axis::Frequency, t) => Signal::Spectrum(t),
            }),
            other => other.build(sigma).map(Signal::Analytic),
        }
    }
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Sigma,
    Rho,
    JRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (name, list) = text
            .split_once('=')
            .ok_or_else(|| format!("sweep `{text}` is not <name>=<v1,v2,...>"))?;
        let param = match name {
            "sigma" => SweepParam::Sigma,
            "rho" => SweepParam::Rho,
            "jrange" => SweepParam::JRange,
            _ => return Err(format!("cannot sweep `{name}` (expected sigma, rho or jrange)")),
        };
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x > 0.0)
                    .ok_or_else(|| format!("sweep value `{v}` is not a positive number"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if param == SweepParam::JRange && values.iter().any(|v| v.fract() != 0.0) {
            return Err("jrange sweep values must be integers".into());
        }
        Ok(Self { param, values })
    }
}

/// Fully validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub generator: GenSpec,
    pub function: Option<GenSpec>,
    pub sigma: f64,
    /// `None` means `rho = sigma` for every swept sigma.
    pub rho: Option<f64>,
    pub tol: f64,
    pub dgrid: usize,
    pub jrange: usize,
    pub res: usize,
    pub output: Option<PathBuf>,
    pub sweep: Option<Sweep>,
}

fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(kind, msg)
}

/// Parses and validates `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, flags) = match cli.command {
        Subcmd::Dfun(f) => (Command::Dfun, f),
        Subcmd::Riesz(f) => (Command::Riesz, f),
        Subcmd::Zak(f) => (Command::Zak, f),
        Subcmd::Project(f) => (Command::Project, f),
        Subcmd::Besterr(f) => (Command::Besterr, f),
        Subcmd::Compare(f) => (Command::Compare, f),
        Subcmd::Validate(f) => (Command::Validate, f),
    };
    let invalid = |flag: &str, msg: String| usage(ErrorKind::ValueValidation, format!("--{flag}: {msg}"));
    let generator = GenSpec::parse(&flags.generator).map_err(|m| invalid("gen", m))?;
    let function = flags
        .function
        .as_deref()
        .map(GenSpec::parse)
        .transpose()
        .map_err(|m| invalid("f", m))?;
    if matches!(command, Command::Project | Command::Besterr | Command::Compare) && function.is_none() {
        return Err(usage(
            ErrorKind::MissingRequiredArgument,
            "--f <SPEC> is required for project, besterr and compare",
        ));
    }
    let sigma = flags.sigma.or(generator.own_sigma()).unwrap_or(1.0);
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    if !(flags.tol > 0.0 && flags.tol.is_finite()) {
        return Err(invalid("tol", format!("must be positive, got {}", flags.tol)));
    }
    if flags.dgrid < 5 {
        return Err(invalid("dgrid", format!("needs at least 5 nodes, got {}", flags.dgrid)));
    }
    if flags.res < 2 {
        return Err(invalid("res", format!("needs at least 2 cells, got {}", flags.res)));
    }
    let sweep = flags
        .sweep
        .as_deref()
        .map(Sweep::parse)
        .transpose()
        .map_err(|m| invalid("sweep", m))?;
    let allowed = match command {
        Command::Besterr => &[SweepParam::Sigma, SweepParam::Rho][..],
        Command::Compare => &[SweepParam::JRange][..],
        _ => &[][..],
    };
    if let Some(s) = &sweep {
        if !allowed.contains(&s.param) {
            return Err(invalid("sweep", format!("{:?} cannot be swept for this command", s.param)));
        }
    }
    let sigmas: Vec<f64> = match &sweep {
        Some(Sweep {
            param: SweepParam::Sigma,
            values,
        }) => values.clone(),
        _ => vec![sigma],
    };
    let min_sigma = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(rho) = flags.rho {
        if !(rho > 0.0) {
            return Err(invalid("rho", format!("must be positive, got {rho}")));
        }
        if rho > min_sigma {
            return Err(invalid("rho", format!("{rho} exceeds sigma = {min_sigma}")));
        }
    }
    if let Some(Sweep {
        param: SweepParam::Rho,
        values,
    }) = &sweep
    {
        if let Some(r) = values.iter().find(|r| **r > sigma) {
            return Err(invalid("sweep", format!("rho {r} exceeds sigma = {sigma}")));
        }
    }
    Ok(RunConfig {
        command,
        generator,
        function,
        sigma,
        rho: flags.rho,
        tol: flags.tol,
        dgrid: flags.dgrid,
        jrange: flags.jrange,
        res: flags.res,
        output: flags.out,
        sweep,
    })
}

/// Failure of a run after successful parsing.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Numerical(#[from] shiftspace::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
    #[error("{0} of the checks exceeded their budgets")]
    ValidationFailed(usize),
}

fn grid(sigma: f64, nodes: usize) -> shiftspace::Result<Grid> {
    Grid::new(-sigma, sigma, nodes)
}

/// Executes a run, writing its CSV to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let mut text = String::new();
    let status = render(cfg, &mut text);
    let path = cfg
        .output
        .as_deref()
        .map(Path::display)
        .map(|d| d.to_string())
        .unwrap_or_else(|| "standard output".into());
    let write = |w: &mut dyn Write| w.write_all(text.as_bytes()).and_then(|_| w.flush());
    match &cfg.output {
        Some(p) => std::fs::File::create(p).and_then(|mut f| write(&mut f)),
        None => write(out),
    }
    .map_err(|source| RunError::Output { path, source })?;
    status
}

fn render(cfg: &RunConfig, s: &mut String) -> Result<(), RunError> {
    use std::fmt::Write as _;
    let sigma = cfg.sigma;
    let rho = cfg.rho.unwrap_or(sigma);
    match cfg.command {
        Command::Dfun => {
            let gen = cfg.generator.build(sigma)?;
            let d = periodize(&gen, sigma, &grid(sigma, cfg.dgrid)?, cfg.tol)?;
            s.push_str("y,D\n");
            for (y, v) in d.grid().nodes().zip(d.values()) {
                let _ = writeln!(s, "{y:?},{v:?}");
            }
        }
        Command::Riesz => {
            let gen = cfg.generator.build(sigma)?;
            let d = periodize(&gen, sigma, &grid(sigma, cfg.dgrid)?, cfg.tol)?;
            let r = riesz_bounds(&d);
            let _ = writeln!(s, "A={:?} B={:?} class={}", r.lower, r.upper, r.classification);
        }
        Command::Zak => {
            let gen = cfg.generator.build(sigma)?;
            let field = phi_field(&gen, sigma, cfg.res, cfg.tol)?;
            s.push_str("x,y,re,im\n");
            for (x, y, v) in field.entries() {
                let _ = writeln!(s, "{x:?},{y:?},{:?},{:?}", v.re, v.im);
            }
        }
        Command::Project => {
            let gen = cfg.generator.build(sigma)?;
            let f = cfg.function.as_ref().expect("validated").signal(sigma)?;
            let r = project(&f, &gen, sigma, rho, &grid(sigma, cfg.dgrid)?, cfg.jrange, cfg.tol)?;
            s.push_str("j,re,im\n");
            for (j, c) in r.coeffs.indexed() {
                let _ = writeln!(s, "{j},{:?},{:?}", c.re, c.im);
            }
            s.push_str("\ny,re,im\n");
            for (y, z) in r.zeta.grid.nodes().zip(&r.zeta.values) {
                let _ = writeln!(s, "{y:?},{:?},{:?}", z.re, z.im);
            }
            let _ = writeln!(
                s,
                "\nnorm_sq={:?} error_sq={:?} guard_mass={:?}",
                r.projection_norm_sq, r.error_sq, r.guard_mass
            );
        }
        Command::Besterr => {
            let spec = cfg.function.as_ref().expect("validated");
            let points: Vec<(f64, f64, f64)> = match &cfg.sweep {
                Some(Sweep {
                    param: SweepParam::Sigma,
                    values,
                }) => values.iter().map(|&sg| (sg, sg, cfg.rho.unwrap_or(sg))).collect(),
                Some(Sweep {
                    param: SweepParam::Rho,
                    values,
                }) => values.iter().map(|&r| (r, sigma, r)).collect(),
                _ => vec![(rho, sigma, rho)],
            };
            s.push_str("param,error_sq\n");
            for (param, sg, r) in points {
                let gen = cfg.generator.build(sg)?;
                let f = spec.signal(sg)?;
                let e = best_approx_error_sq(&f, &gen, sg, r, &grid(sg, cfg.dgrid)?, cfg.tol)?;
                let _ = writeln!(s, "{param:?},{e:?}");
            }
        }
        Command::Compare => {
            let gen = cfg.generator.build(sigma)?;
            let f = cfg.function.as_ref().expect("validated").signal(sigma)?;
            let j_ranges: Vec<usize> = match &cfg.sweep {
                Some(sw) => sw.values.iter().map(|v| *v as usize).collect(),
                None => vec![8, 16, 32, 64],
            };
            let r = compare(&f, &gen, sigma, &j_ranges, &grid(sigma, cfg.dgrid)?, cfg.tol)?;
            s.push_str("j_range,oracle_residual,formula_error,gap\n");
            for row in &r.rows {
                let _ = writeln!(
                    s,
                    "{},{:?},{:?},{:?}",
                    row.j_range, row.oracle_residual, row.formula_error, row.gap
                );
            }
        }
        Command::Validate => {
            let gen = cfg.generator.build(sigma)?;
            let report = verify_phi_properties(&gen, sigma, cfg.res, cfg.tol)?;
            s.push_str("check,residual,budget,status\n");
            let mut failures = 0;
            for r in &report.results {
                match &r.outcome {
                    CheckOutcome::Measured { residual, .. } => {
                        let budget = VALIDATE_TOL_FACTOR * cfg.tol + r.numerical_error();
                        let pass = *residual <= budget;
                        failures += usize::from(!pass);
                        let status = if pass { "pass" } else { "fail" };
                        let _ = writeln!(s, "{},{residual:?},{budget:?},{status}", r.check);
                    }
                    CheckOutcome::Skipped(reason) => {
                        eprintln!("{}: skipped ({reason})", r.check);
                        let _ = writeln!(s, "{},,,skipped", r.check);
                    }
                }
            }
            if failures > 0 {
                return Err(RunError::ValidationFailed(failures));
            }
        }
    }
    Ok(())
}

/// Parses `argv`, runs, reports diagnostics on standard error and returns
/// the exit status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cfg, &mut io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
