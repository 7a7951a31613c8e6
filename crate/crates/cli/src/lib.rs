//! The `pinney` command line.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 argument or parse error,
//! 3 numeric failure.

pub mod args;
pub mod output;
pub mod validate;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::error::ErrorKind;
use clap::Parser;
use pinney_core::{find_singularities, parse_coefficient, solve, CoefficientSpec, PinneyError};
use serde_json::json;

use args::{
    Cli, Command, Format, OutputArgs, ParseCheckArgs, ReportFormat, SingularitiesArgs, SolveArgs, ValidateArgs,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<PinneyError> for Failure {
    fn from(e: PinneyError) -> Self {
        match e {
            PinneyError::ZeroC
            | PinneyError::ZeroInitialValue
            | PinneyError::NonFinite(_)
            | PinneyError::InvalidArgument(_)
            | PinneyError::Expr(_)
            | PinneyError::MethodUnavailable(_)
            | PinneyError::NotApplicable(_) => Failure::Usage(e.to_string()),
            PinneyError::CoefficientEvalFailed { .. }
            | PinneyError::StepSizeCollapse { .. }
            | PinneyError::OutOfRange { .. }
            | PinneyError::SingularOrInvalid { .. } => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Singularities(a) => cmd_singularities(a, stdout, stderr),
        Command::Validate(a) => cmd_validate(a, stdout),
        Command::ParseCheck(a) => cmd_parse_check(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numeric(msg)) => {
            let _ = writeln!(stderr, "numeric failure: {msg}");
            EXIT_NUMERIC
        }
    }
}

fn with_output(
    target: &OutputArgs,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    match &target.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let problem = a.problem.problem()?;
    let cfg = a.problem.config()?;
    let solved = solve(&problem, a.problem.from, a.problem.to, a.samples, &cfg, a.method.into())?;
    with_output(&a.output, stdout, |w| match a.output.format {
        Format::Csv => output::write_solve_csv(w, &solved),
        Format::Json => output::write_solve_json(w, &problem, &solved),
    })?;
    Ok(EXIT_OK)
}

fn cmd_singularities(a: SingularitiesArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let problem = a.problem.problem()?;
    let cfg = a.problem.config()?;
    if a.refine_tol.is_nan() || a.refine_tol <= 0.0 {
        return Err(Failure::Usage("--refine-tol must be positive".into()));
    }
    if !(a.problem.from <= problem.x0() && problem.x0() <= a.problem.to) {
        return Err(Failure::Usage(format!(
            "x0={} must lie in [{}, {}]",
            problem.x0(),
            a.problem.from,
            a.problem.to
        )));
    }
    let report = find_singularities(&problem, a.problem.from, a.problem.to, &cfg, a.refine_tol)?;
    if report.not_applicable {
        writeln!(stderr, "no singularities: c<0")?;
        if a.output.format == Format::Csv {
            return Ok(EXIT_OK);
        }
    }
    with_output(&a.output, stdout, |w| match a.output.format {
        Format::Csv => {
            writeln!(w, "x,factor")?;
            for p in &report.points {
                writeln!(w, "{},{}", output::num(p.x), p.factor.name())?;
            }
            Ok(())
        }
        Format::Json => {
            let diagnostics = json!({
                "singular_points": report.points,
                "domain": [report.domain.0, report.domain.1],
                "note": report.not_applicable.then_some("no singularities: c<0"),
            });
            let doc = output::envelope(&problem, &[], &[], diagnostics);
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
    })?;
    Ok(EXIT_OK)
}

fn cmd_validate(a: ValidateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let problem = a.problem.problem()?;
    let cfg = a.problem.config()?;
    let checks = validate::run_checks(&problem, a.problem.from, a.problem.to, a.samples, &cfg)?;
    let all_pass = checks.iter().all(|c| c.pass);
    match a.format {
        ReportFormat::Table => write!(stdout, "{}", validate::table(&checks))?,
        ReportFormat::Json => {
            let doc = output::envelope(&problem, &[], &[], json!({ "checks": checks, "all_pass": all_pass }));
            serde_json::to_writer_pretty(&mut *stdout, &doc).map_err(io::Error::from)?;
            writeln!(stdout)?;
        }
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_parse_check(a: ParseCheckArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let spec = parse_coefficient(&a.a).map_err(PinneyError::from)?;
    match &spec {
        CoefficientSpec::Constant(v) => writeln!(stdout, "constant {}", output::num(*v))?,
        CoefficientSpec::Expr(e) => writeln!(stdout, "{e}")?,
    }
    if let Some(x) = a.at {
        let v = spec
            .eval(x)
            .map_err(|source| PinneyError::CoefficientEvalFailed { x, source })?;
        writeln!(stdout, "{}", output::num(v))?;
    }
    Ok(EXIT_OK)
}
