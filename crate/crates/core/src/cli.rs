//! The `frares` command line.
//!
//! Exit codes: 0 success, 1 a numerical check failed, 2 usage or validation
//! error, 3 I/O error. `FRARES_TOL` replaces every pass/fail tolerance;
//! `--tol` takes precedence over it.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use crate::error::Error;
use crate::io::{self, Metadata};
use crate::kernels::kernel_seq;
use crate::operator::OperatorDescriptor;
use crate::resolvent::{
    check_ztransform, coeff_table, compare_mittag_leffler, family_explicit, family_recursive, family_series,
    functional_equation_grid, kernel_ztransform, subordinate_exponential, ResolventFamily,
};
use crate::solver::{residual, solve_direct, solve_vop, FdeSolution};

pub const TOL_ENV: &str = "FRARES_TOL";

#[derive(Debug, Parser)]
#[command(name = "frares", version, about = "Discrete fractional resolvent families and Caputo difference equations")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Tolerance for every pass/fail check of the command.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Data as CSV; with `--output`, metadata goes to `<output>.json`.
    Csv,
    /// Metadata and summary values only.
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel values k^alpha(n) for n = 0..=N.
    Kernels(KernelsArgs),
    /// Coefficient table of the explicit representation.
    Coeffs(CoeffsArgs),
    /// Resolvent family S^0..S^N of a generator.
    Resolvent(ResolventArgs),
    /// Check identities satisfied by resolvent families.
    Verify(VerifyArgs),
    /// Solve a Caputo difference initial value problem from a JSON file.
    Solve(SolveArgs),
    /// Compare the scalar family of -rho with t^(beta-1) E_{alpha,beta}(-rho t^alpha).
    CompareMl(CompareMlArgs),
}

#[derive(Debug, Args)]
pub struct KernelsArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Explicit,
    Recursive,
    Series,
    All,
}

#[derive(Debug, Args)]
pub struct ResolventArgs {
    /// scalar:<v>[:<d>], diag:<a,b,...>, laplacian:<d>:<h> or file:<path>.
    #[arg(long)]
    pub op: OperatorDescriptor,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Recursive)]
    pub method: MethodArg,
    /// Truncation threshold of the series construction.
    #[arg(long, default_value_t = 1e-12)]
    pub series_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Functional,
    Ztransform,
    Subordination,
    Resolvent,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value = "scalar:-1")]
    pub op: OperatorDescriptor,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// Largest index of the functional-equation grid and horizon of the other suites.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Horizon of the Z-transform partial sums.
    #[arg(long, default_value_t = 200)]
    pub z_horizon: usize,
    #[arg(long, default_value_t = 2.0)]
    pub z: f64,
    /// Exponent of the subordinated exponential.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethodArg {
    Vop,
    Direct,
    Both,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveMethodArg::Both)]
    pub method: SolveMethodArg,
}

#[derive(Debug, Args)]
pub struct CompareMlArgs {
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Where to write a gnuplot script for the CSV output (needs `--output`).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => CliError::Io(e.to_string()),
            Error::NonConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// One pass/fail line of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

/// Result of a successful run: its checks and informational lines.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Parses arguments, runs, prints the report and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{}", e.render());
            return 2;
        }
        Err(e) => {
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    let report_to_stdout = cfg.output.is_some() || matches!(cfg.command, Command::Verify(_));
    match run(&cfg, stdout) {
        Ok(outcome) => {
            let sink: &mut dyn Write = if report_to_stdout { stdout } else { stderr };
            for line in outcome.notes.iter().cloned().chain(outcome.checks.iter().map(Check::line)) {
                let _ = writeln!(sink, "{line}");
            }
            if outcome.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn tolerance(cfg: &RunConfig, default: f64) -> Result<f64, CliError> {
    let value = match cfg.tol {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("{TOL_ENV}={s:?} is not a number")))?,
            Err(_) => return Ok(default),
        },
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("tolerance must be positive, got {value}")))
    }
}

/// Runs one command, writing data to `--output` or `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Kernels(a) => cmd_kernels(cfg, a, stdout),
        Command::Coeffs(a) => cmd_coeffs(cfg, a, stdout),
        Command::Resolvent(a) => cmd_resolvent(cfg, a, stdout),
        Command::Verify(a) => cmd_verify(cfg, a, stdout),
        Command::Solve(a) => cmd_solve(cfg, a, stdout),
        Command::CompareMl(a) => cmd_compare_ml(cfg, a, stdout),
    }
}

fn emit(cfg: &RunConfig, csv: &str, meta: &Metadata, stdout: &mut dyn Write) -> Result<(), CliError> {
    let json = io::to_json(meta)?;
    let body = match cfg.format {
        Format::Csv => csv,
        Format::Json => json.as_str(),
    };
    match &cfg.output {
        Some(path) => {
            io::write_file(path, body)?;
            if cfg.format == Format::Csv {
                io::write_file(&sidecar(path), &json)?;
            }
        }
        None => stdout.write_all(body.as_bytes()).map_err(|e| CliError::Io(format!("standard output: {e}")))?,
    }
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn cmd_kernels(cfg: &RunConfig, a: &KernelsArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let k = kernel_seq(a.alpha, a.tau, a.n)?;
    let meta = Metadata {
        command: "kernels".into(),
        alpha: a.alpha,
        beta: None,
        tau: a.tau,
        n: a.n,
        operator: None,
        method: None,
        summary: vec![],
    };
    emit(cfg, &io::kernel_csv(&k), &meta, out)?;
    Ok(Outcome::default())
}

fn cmd_coeffs(cfg: &RunConfig, a: &CoeffsArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let t = coeff_table(a.alpha, a.beta, a.tau, a.n)?;
    let worst = crate::resolvent::row_sum_residuals(&t)?.into_iter().fold(0.0, f64::max);
    let meta = Metadata {
        command: "coeffs".into(),
        alpha: a.alpha,
        beta: Some(a.beta),
        tau: a.tau,
        n: a.n,
        operator: None,
        method: None,
        summary: vec![("precision_bits".into(), t.precision() as f64), ("max_row_sum_residual".into(), worst)],
    };
    emit(cfg, &io::coeff_table_csv(&t), &meta, out)?;
    Ok(Outcome { checks: vec![Check::new("row sums equal k^beta(n) (relative)", worst, tolerance(cfg, 1e-10)?)], notes: vec![] })
}

fn cmd_resolvent(cfg: &RunConfig, a: &ResolventArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let residual_tol = tolerance(cfg, 1e-10)?;
    let agreement_tol = tolerance(cfg, 1e-8)?;
    let op = a.op.build()?;
    let explicit = || -> Result<ResolventFamily, CliError> {
        let t = coeff_table(a.alpha, a.beta, a.tau, a.n)?;
        Ok(family_explicit(&op, &t, a.n)?)
    };
    let recursive = || -> Result<ResolventFamily, CliError> { Ok(family_recursive(&op, a.alpha, a.beta, a.tau, a.n)?) };
    let series = || -> Result<ResolventFamily, CliError> {
        Ok(family_series(&op, a.alpha, a.beta, a.tau, a.n, a.series_tol)?)
    };

    let mut outcome = Outcome::default();
    let mut extra: Vec<(String, Vec<f64>)> = Vec::new();
    let family = match a.method {
        MethodArg::Explicit => explicit()?,
        MethodArg::Recursive => recursive()?,
        MethodArg::Series => series()?,
        MethodArg::All => {
            let r = recursive()?;
            let e = explicit()?;
            let mut others = vec![("explicit", e)];
            match series() {
                Ok(s) => others.push(("series", s)),
                Err(CliError::Usage(msg)) => outcome.notes.push(format!("series skipped: {msg}")),
                Err(other) => return Err(other),
            }
            for (name, f) in &others {
                let col = (0..=a.n)
                    .map(|n| (&f.get(n).to_dense() - &r.get(n).to_dense()).amax() / r.scale().max(f64::MIN_POSITIVE))
                    .collect();
                extra.push((format!("diff_{name}_recursive"), col));
                outcome.checks.push(Check::new(
                    format!("{name} vs recursive, max relative difference"),
                    f.relative_difference(&r),
                    agreement_tol,
                ));
            }
            if let [(_, e), (_, s)] = &others[..] {
                outcome.checks.push(Check::new(
                    "explicit vs series, max relative difference",
                    e.relative_difference(s),
                    agreement_tol,
                ));
            }
            r
        }
    };
    let residuals: Vec<f64> = family.resolvent_equation_residuals()?.iter().map(|r| r.relative()).collect();
    outcome.checks.insert(
        0,
        Check::new("resolvent equation residual (relative)", residuals.iter().copied().fold(0.0, f64::max), residual_tol),
    );
    let mut columns: Vec<(&str, Vec<f64>)> = vec![("residual", residuals)];
    columns.extend(extra.iter().map(|(n, c)| (n.as_str(), c.clone())));

    let meta = Metadata {
        command: "resolvent".into(),
        alpha: a.alpha,
        beta: Some(a.beta),
        tau: a.tau,
        n: a.n,
        operator: Some(a.op.to_string()),
        method: Some(format!("{:?}", a.method).to_lowercase()),
        summary: outcome.checks.iter().map(|c| (c.name.clone(), c.value)).collect(),
    };
    emit(cfg, &io::family_csv(&family, &columns), &meta, out)?;
    Ok(outcome)
}

fn cmd_verify(cfg: &RunConfig, a: &VerifyArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let op = a.op.build()?;
    let want = |s: Suite| a.suite == s || a.suite == Suite::All;
    let mut outcome = Outcome::default();

    if want(Suite::Resolvent) {
        let f = family_recursive(&op, a.alpha, a.beta, a.tau, a.n)?;
        let t = coeff_table(a.alpha, a.beta, a.tau, a.n)?;
        let e = family_explicit(&op, &t, a.n)?;
        let worst = |v: Vec<crate::resolvent::Residual>| v.iter().map(|r| r.relative()).fold(0.0, f64::max);
        outcome.checks.push(Check::new("resolvent equation, recursive", worst(f.resolvent_equation_residuals()?), tolerance(cfg, 1e-10)?));
        outcome.checks.push(Check::new("resolvent equation, explicit", worst(e.resolvent_equation_residuals()?), tolerance(cfg, 1e-10)?));
        outcome.checks.push(Check::new("commutation A S^n = S^n A", worst(f.commutation_residuals()?), tolerance(cfg, 1e-10)?));
        outcome.checks.push(Check::new("explicit vs recursive", e.relative_difference(&f), tolerance(cfg, 1e-8)?));
    }
    if want(Suite::Functional) {
        let f = family_recursive(&op, a.alpha, a.beta, a.tau, a.n)?;
        let worst = functional_equation_grid(&f, a.n)?.iter().map(|(_, _, r)| r.relative()).fold(0.0, f64::max);
        outcome.checks.push(Check::new(format!("functional equation, all m, n <= {}", a.n), worst, tolerance(cfg, 1e-9)?));
    }
    if want(Suite::Ztransform) {
        let limit = tolerance(cfg, 1e-6)?;
        let k = kernel_ztransform(a.alpha, a.tau, a.z, a.z_horizon)?;
        let f = family_recursive(&op, a.alpha, a.beta, a.tau, a.z_horizon)?;
        let x = DVector::from_element(op.dim(), 1.0);
        let s = check_ztransform(&f, a.z, &x)?;
        for (name, c) in [("kernel", &k), ("family", &s)] {
            match c.relative_tail_bound() {
                Some(bound) => {
                    outcome.notes.push(format!("{name} Z-transform at z = {}: tail bound {bound:.3e}", a.z));
                    outcome.checks.push(Check::new(format!("{name} Z-transform, tail bound"), bound, limit));
                    outcome.checks.push(Check::new(format!("{name} Z-transform, residual"), c.residual, bound.max(0.0) + 1e-13));
                }
                None => {
                    outcome.notes.push(format!("{name} Z-transform at z = {}: INCONCLUSIVE ({:?})", a.z, c.tail));
                    outcome.checks.push(Check::new(format!("{name} Z-transform, tail bound"), f64::INFINITY, limit));
                }
            }
        }
    }
    if want(Suite::Subordination) {
        let tol = tolerance(cfg, 1e-8)?;
        let values = subordinate_exponential(a.omega, a.tau, a.n)?;
        let closed = values
            .iter()
            .enumerate()
            .map(|(n, v)| {
                let e = (1.0 - a.omega * a.tau).powi(-(n as i32 + 1));
                ((v - e) / e).abs()
            })
            .fold(0.0, f64::max);
        let f = family_recursive(&crate::operator::LinOp::scalar(a.omega), 1.0, 1.0, a.tau, a.n)?;
        let family = values
            .iter()
            .enumerate()
            .map(|(n, v)| {
                let s = f.get(n).to_dense()[(0, 0)];
                ((v - s) / s).abs()
            })
            .fold(0.0, f64::max);
        outcome.checks.push(Check::new("subordinated exponential vs (1 - omega tau)^-(n+1)", closed, tol));
        outcome.checks.push(Check::new("subordinated exponential vs (1,1)-family", family, tol));
    }

    if let Some(path) = &cfg.output {
        let mut csv = String::from("identity,value,tolerance,passed\n");
        for c in &outcome.checks {
            csv.push_str(&format!("\"{}\",{},{},{}\n", c.name, io::fmt_num(c.value), io::fmt_num(c.tolerance), c.passed()));
        }
        let body = match cfg.format {
            Format::Csv => csv,
            Format::Json => io::to_json(&Metadata {
                command: "verify".into(),
                alpha: a.alpha,
                beta: Some(a.beta),
                tau: a.tau,
                n: a.n,
                operator: Some(a.op.to_string()),
                method: Some(format!("{:?}", a.suite).to_lowercase()),
                summary: outcome.checks.iter().map(|c| (c.name.clone(), c.value)).collect(),
            })?,
        };
        io::write_file(path, &body)?;
    }
    let _ = out;
    Ok(outcome)
}

fn cmd_solve(cfg: &RunConfig, a: &SolveArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let p = io::load_problem(&a.problem)?;
    let agreement_tol = tolerance(cfg, 1e-9)?;
    let residual_tol = tolerance(cfg, 1e-11)?;
    let mut outcome = Outcome::default();

    let vop = matches!(a.method, SolveMethodArg::Vop | SolveMethodArg::Both).then(|| solve_vop(&p)).transpose()?;
    let direct = matches!(a.method, SolveMethodArg::Direct | SolveMethodArg::Both).then(|| solve_direct(&p)).transpose()?;

    if let Some(d) = &direct {
        outcome.checks.push(Check::new("direct residual, n >= 2 (relative)", d.max_residual(), residual_tol));
    }
    if let (Some(v), Some(d)) = (&vop, &direct) {
        outcome.checks.push(Check::new("vop vs direct, max relative difference", trajectory_difference(v, d), agreement_tol));
    }
    if let Some(v) = &vop {
        let worst = residual(&p, &v.family_trajectory)?.iter().map(|(_, r)| r.abs).fold(0.0, f64::max);
        outcome.notes.push(format!("vop residual, n >= 2 (relative): max {:.6e}", v.max_residual()));
        outcome.notes.push(format!("vop residual with zero history before t = 0: max {:.6e}", worst));
    }
    let primary: &FdeSolution = vop.as_ref().or(direct.as_ref()).expect("at least one method");
    let meta = Metadata {
        command: "solve".into(),
        alpha: p.alpha(),
        beta: Some(1.0),
        tau: p.tau(),
        n: p.horizon(),
        operator: Some(p.op().kind().to_string()),
        method: Some(format!("{:?}", a.method).to_lowercase()),
        summary: outcome.checks.iter().map(|c| (c.name.clone(), c.value)).collect(),
    };
    emit(cfg, &io::solution_csv(primary), &meta, out)?;
    Ok(outcome)
}

fn trajectory_difference(a: &FdeSolution, b: &FdeSolution) -> f64 {
    let (x, y) = (a.family_trajectory.entries(), b.family_trajectory.entries());
    let scale = x.iter().map(|v| v.amax()).fold(0.0, f64::max);
    let diff = x.iter().zip(y).map(|(u, v)| (u - v).amax()).fold(0.0, f64::max);
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn cmd_compare_ml(cfg: &RunConfig, a: &CompareMlArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    if a.plot.is_some() && cfg.output.is_none() {
        return Err(CliError::Usage("--plot needs --output for the data file".into()));
    }
    let c = compare_mittag_leffler(a.rho, a.alpha, a.beta, a.n)?;
    let meta = Metadata {
        command: "compare-ml".into(),
        alpha: a.alpha,
        beta: Some(a.beta),
        tau: 1.0 / a.n as f64,
        n: a.n,
        operator: Some(format!("scalar:{}", -a.rho)),
        method: Some("recursive".into()),
        summary: vec![("max_error".into(), c.max_error())],
    };
    emit(cfg, &io::ml_csv(&c), &meta, out)?;
    if let (Some(plot), Some(data)) = (&a.plot, &cfg.output) {
        io::write_file(plot, &io::ml_plot_script(&c, data))?;
    }
    Ok(Outcome { checks: vec![], notes: vec![format!("max |S^n - e(t_n)| over n >= 1: {:.17e}", c.max_error())] })
}
