//! `bcinv` command-line front end.
//!
//! Exit codes: 0 success, 1 parse/IO/usage error, 2 shape error,
//! 3 nonexistence, 4 verification failure, 5 cross-check failure.

pub mod mtx;
pub mod selftest;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bcinv_core::analysis::{
    default_carrier, default_eps_schedule, derivative_along_curve, limit_representation,
    perturbation_experiment, prescribed_outer, to_csv, CurveSpec,
};
use bcinv_core::inverse::{onesided_family, Side};
use bcinv_core::random::Sampler;
use bcinv_core::special::{special_inverse, SpecialKind, WeightPair};
use bcinv_core::{
    bc_inverse, existence_report, inverse_along, CMatrix, ComputeOptions, Error, Method, Residuals,
    Tolerance,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error as ThisError;

use crate::mtx::{format_matrix, read_matrix, MtxError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SHAPE: i32 = 2;
pub const EXIT_NONEXISTENT: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_CROSS_CHECK: i32 = 5;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Mtx(#[from] MtxError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Mtx(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Verify(_) => EXIT_VERIFY,
            CliError::Core(err) => match err {
                Error::InvalidInput(_) | Error::InvalidWeights(_) | Error::SubspaceMismatch(_) => {
                    EXIT_INPUT
                }
                Error::Shape(_) => EXIT_SHAPE,
                Error::RankZero
                | Error::Singular
                | Error::NotComplementary
                | Error::NotInvertible(_)
                | Error::NotOneSidedInvertible(_)
                | Error::NoGroupInverse
                | Error::SingularShift(_)
                | Error::RankDrift(_) => EXIT_NONEXISTENT,
                Error::ResidualCheckFailed { .. } => EXIT_VERIFY,
                Error::CrossCheckFailed { .. } => EXIT_CROSS_CHECK,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "bcinv",
    version,
    about = "Compute and verify (D,E)-inverses of complex matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report left, right and two-sided existence (exit 3 if no two-sided inverse)
    Exists(Job),
    /// Compute the (D,E)-inverse
    Compute(Job),
    /// Compute the inverse along D
    Along(Job),
    /// Check a candidate X against the defining equations (exit 4 on failure)
    Verify(Job),
    /// Emit a member of the left or right family
    Family(Job),
    /// Classical generalized inverses
    Special {
        #[arg(value_enum)]
        kind: KindArg,
        #[command(flatten)]
        job: Job,
    },
    /// Outer inverse with prescribed range T and kernel S
    Prescribed(Job),
    /// Perturbation table for A + δR_A, D(I + δR), (I + δR')E
    Perturb(Job),
    /// Error table of the shifted-resolvent limit
    Limit(Job),
    /// Closed-form derivative versus a central difference along a random curve
    Diff(Job),
    /// Run the built-in example suite
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Mp,
    Group,
    Drazin,
    Core,
    Dualcore,
    Wmp,
}

impl From<KindArg> for SpecialKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Mp => SpecialKind::Mp,
            KindArg::Group => SpecialKind::Group,
            KindArg::Drazin => SpecialKind::Drazin,
            KindArg::Core => SpecialKind::Core,
            KindArg::Dualcore => SpecialKind::DualCore,
            KindArg::Wmp => SpecialKind::WeightedMp,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Mp,
    Frf,
    Basis,
    Svdpq,
    Elim,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mp => Method::MpFormula,
            MethodArg::Frf => Method::FrfFormula,
            MethodArg::Basis => Method::BasisMethod,
            MethodArg::Svdpq => Method::SvdPQ,
            MethodArg::Elim => Method::Elimination,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Mtx,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args)]
struct Job {
    #[arg(long)]
    a: Option<PathBuf>,
    #[arg(long)]
    d: Option<PathBuf>,
    #[arg(long)]
    e: Option<PathBuf>,
    /// Carrier with R(G) = R(D) and K(G) = K(E)
    #[arg(long)]
    g: Option<PathBuf>,
    /// Row weight (n × n, positive definite)
    #[arg(long)]
    m: Option<PathBuf>,
    /// Column weight (m × m, positive definite)
    #[arg(long)]
    n: Option<PathBuf>,
    /// Candidate inverse
    #[arg(long)]
    x: Option<PathBuf>,
    /// Family parameter; random from --seed when absent
    #[arg(long)]
    z: Option<PathBuf>,
    /// Basis of the prescribed range
    #[arg(long)]
    t: Option<PathBuf>,
    /// Basis of the prescribed kernel
    #[arg(long)]
    s: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum, default_value = "right")]
    side: SideArg,
    #[arg(long, env = "BCINV_TOL_REL")]
    tol_rel: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    tol_abs: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated perturbation sizes
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    /// Comma-separated shifts
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Difference step
    #[arg(long, default_value_t = 1e-5)]
    h: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Job {
    fn tolerance(&self) -> CliResult<Tolerance> {
        match self.tol_rel {
            Some(rel) => Ok(Tolerance::new(rel, self.tol_abs)?),
            // validates abs; the relative factor stays size-dependent
            None => Ok(Tolerance {
                rel: None,
                ..Tolerance::new(0.0, self.tol_abs)?
            }),
        }
    }

    fn options(&self) -> ComputeOptions {
        ComputeOptions {
            method: self.method.map(Method::from),
            ..ComputeOptions::default()
        }
    }

    fn format(&self, default: Format, allowed: &[Format]) -> CliResult<Format> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Usage(
                format!("--format {f:?} is not available here").to_lowercase(),
            ))
        }
    }
}

fn load(path: &Option<PathBuf>, flag: &str) -> CliResult<CMatrix> {
    match path {
        Some(p) => Ok(read_matrix(p)?),
        None => Err(CliError::Usage(format!("missing required --{flag}"))),
    }
}

fn load_opt(path: &Option<PathBuf>) -> CliResult<Option<CMatrix>> {
    path.as_ref()
        .map(|p| read_matrix(p).map_err(CliError::from))
        .transpose()
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

#[derive(Serialize)]
struct ResultSummary<'a> {
    method: Method,
    r: usize,
    residuals: &'a Residuals,
    scale: f64,
}

fn emit_inverse(job: &Job, res: &bcinv_core::InverseResult) -> CliResult<()> {
    let summary = ResultSummary {
        method: res.method,
        r: res.r,
        residuals: &res.residuals,
        scale: res.scale,
    };
    match job.format(Format::Mtx, &[Format::Mtx, Format::Json])? {
        Format::Json => emit(&job.out, &json(res)),
        _ => {
            let summary = json(&summary);
            eprint!("{summary}");
            if let Some(out) = &job.out {
                let side = sidecar_path(out);
                fs::write(&side, &summary).map_err(|source| CliError::Io { path: side, source })?;
            }
            emit(&job.out, &format_matrix(&res.x))
        }
    }
}

fn emit_matrix(job: &Job, m: &CMatrix) -> CliResult<()> {
    match job.format(Format::Mtx, &[Format::Mtx, Format::Json])? {
        Format::Json => emit(&job.out, &json(m)),
        _ => emit(&job.out, &format_matrix(m)),
    }
}

fn cmd_exists(job: &Job) -> CliResult<i32> {
    job.format(Format::Json, &[Format::Json])?;
    let (a, d, e) = (load(&job.a, "a")?, load(&job.d, "d")?, load(&job.e, "e")?);
    let rep = existence_report(&a, &d, &e, &job.tolerance()?)?;
    emit(&job.out, &json(&rep))?;
    Ok(if rep.two_sided {
        EXIT_OK
    } else {
        EXIT_NONEXISTENT
    })
}

fn cmd_compute(job: &Job) -> CliResult<i32> {
    let (a, d, e) = (load(&job.a, "a")?, load(&job.d, "d")?, load(&job.e, "e")?);
    let res = bc_inverse(&a, &d, &e, &job.tolerance()?, &job.options())?;
    emit_inverse(job, &res)?;
    Ok(EXIT_OK)
}

fn cmd_along(job: &Job) -> CliResult<i32> {
    let (a, d) = (load(&job.a, "a")?, load(&job.d, "d")?);
    let res = inverse_along(&a, &d, &job.tolerance()?, &job.options())?;
    emit_inverse(job, &res)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport {
    residuals: Residuals,
    bound: f64,
    passed: bool,
}

fn cmd_verify(job: &Job) -> CliResult<i32> {
    job.format(Format::Json, &[Format::Json])?;
    let (a, d, e, x) = (
        load(&job.a, "a")?,
        load(&job.d, "d")?,
        load(&job.e, "e")?,
        load(&job.x, "x")?,
    );
    let tol = job.tolerance()?;
    let residuals = bcinv_core::analysis::verify_definition(&a, &d, &e, &x, &tol)?;
    let bound =
        bcinv_core::inverse::RESIDUAL_BOUND * bcinv_core::inverse::problem_scale(&a, &d, &e);
    let passed = residuals.max() <= bound;
    emit(
        &job.out,
        &json(&VerifyReport {
            residuals,
            bound,
            passed,
        }),
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_family(job: &Job) -> CliResult<i32> {
    let (a, d, e) = (load(&job.a, "a")?, load(&job.d, "d")?, load(&job.e, "e")?);
    let side = match job.side {
        SideArg::Left => Side::Left,
        SideArg::Right => Side::Right,
    };
    let family = onesided_family(&a, &d, &e, &job.tolerance()?, side)?;
    let z = match load_opt(&job.z)? {
        Some(z) => z,
        None => {
            let (k, _) = family.parameter_shape();
            Sampler::seeded(job.seed).matrix(k, k)
        }
    };
    emit_matrix(job, &family.member(&z)?)?;
    Ok(EXIT_OK)
}

fn cmd_special(kind: SpecialKind, job: &Job) -> CliResult<i32> {
    let a = load(&job.a, "a")?;
    let tol = job.tolerance()?;
    let weights = match (load_opt(&job.m)?, load_opt(&job.n)?) {
        (None, None) => None,
        (m, n) => Some(WeightPair::new(
            m.unwrap_or_else(|| CMatrix::identity(a.rows())),
            n.unwrap_or_else(|| CMatrix::identity(a.cols())),
            &tol,
        )?),
    };
    let x = special_inverse(kind, &a, weights.as_ref(), &tol)?;
    emit_matrix(job, &x)?;
    Ok(EXIT_OK)
}

fn cmd_prescribed(job: &Job) -> CliResult<i32> {
    let (a, t, s) = (load(&job.a, "a")?, load(&job.t, "t")?, load(&job.s, "s")?);
    let z = prescribed_outer(&a, &t, &s, &job.tolerance()?)?;
    emit_matrix(job, &z)?;
    Ok(EXIT_OK)
}

fn cmd_perturb(job: &Job) -> CliResult<i32> {
    let (a, d, e) = (load(&job.a, "a")?, load(&job.d, "d")?, load(&job.e, "e")?);
    let deltas = job.deltas.clone().unwrap_or_else(default_eps_schedule);
    let table = perturbation_experiment(&a, &d, &e, &deltas, job.seed, &job.tolerance()?)?;
    match job.format(Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => emit(&job.out, &json(&table))?,
        _ => emit(&job.out, &to_csv(&table.convergence()))?,
    }
    Ok(EXIT_OK)
}

fn cmd_limit(job: &Job) -> CliResult<i32> {
    let (a, d, e) = (load(&job.a, "a")?, load(&job.d, "d")?, load(&job.e, "e")?);
    let tol = job.tolerance()?;
    let g = match load_opt(&job.g)? {
        Some(g) => g,
        None => default_carrier(&d, &e, &tol)?,
    };
    let eps = job.eps.clone().unwrap_or_else(default_eps_schedule);
    let rows = limit_representation(&a, &d, &e, &g, &eps, &tol)?;
    match job.format(Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => emit(&job.out, &json(&rows))?,
        _ => emit(&job.out, &to_csv(&rows))?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DiffReport {
    t0: f64,
    h: f64,
    gap: f64,
    scale: f64,
}

fn cmd_diff(job: &Job) -> CliResult<i32> {
    let (a, d, e) = (load(&job.a, "a")?, load(&job.d, "d")?, load(&job.e, "e")?);
    let (n, m) = a.shape();
    let mut s = Sampler::seeded(job.seed);
    let unit = |s: &mut Sampler, r: usize, c: usize| {
        let x = s.matrix(r, c);
        let norm = bcinv_core::linalg::spectral_norm(&x);
        x.scale_real(1.0 / norm)
    };
    let (da, rd, re) = (unit(&mut s, n, m), unit(&mut s, n, n), unit(&mut s, m, m));
    let curve = CurveSpec {
        a: Box::new(move |t| &a + &da.scale_real(t)),
        d: Box::new(move |t| &d * &(&CMatrix::identity(n) + &rd.scale_real(t))),
        e: Box::new(move |t| &(&CMatrix::identity(m) + &re.scale_real(t)) * &e),
        t0: 0.0,
        h: job.h,
    };
    let check = derivative_along_curve(&curve, &job.tolerance()?)?;
    let report = DiffReport {
        t0: curve.t0,
        h: curve.h,
        gap: check.gap,
        scale: check.scale,
    };
    match job.format(Format::Json, &[Format::Csv, Format::Json])? {
        Format::Csv => emit(
            &job.out,
            &format!(
                "t0,h,gap,scale\n{:.16e},{:.16e},{:.16e},{:.16e}\n",
                report.t0, report.h, report.gap, report.scale
            ),
        )?,
        _ => emit(&job.out, &json(&report))?,
    }
    Ok(EXIT_OK)
}

fn cmd_selftest() -> CliResult<i32> {
    let checks = selftest::run_all();
    let mut stdout = std::io::stdout().lock();
    for c in &checks {
        let _ = writeln!(
            stdout,
            "{} {}{}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail_suffix()
        );
    }
    Ok(if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Exists(job) => cmd_exists(job),
        Command::Compute(job) => cmd_compute(job),
        Command::Along(job) => cmd_along(job),
        Command::Verify(job) => cmd_verify(job),
        Command::Family(job) => cmd_family(job),
        Command::Special { kind, job } => cmd_special((*kind).into(), job),
        Command::Prescribed(job) => cmd_prescribed(job),
        Command::Perturb(job) => cmd_perturb(job),
        Command::Limit(job) => cmd_limit(job),
        Command::Diff(job) => cmd_diff(job),
        Command::Selftest => cmd_selftest(),
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("bcinv: {err}");
            err.exit_code()
        }
    }
}
