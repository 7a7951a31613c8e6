use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pinney_core::{parse_coefficient, validate_problem, CoefficientSpec, Method, PinneyProblem, Result, SolverConfig};

#[derive(Debug, Parser)]
#[command(
    name = "pinney",
    version,
    about = "Solve y'' + a(x) y + c / y^3 = 0 by nonlinear superposition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the solution on a uniform grid.
    Solve(SolveArgs),
    /// Locate points where the solution is singular (c > 0).
    Singularities(SingularitiesArgs),
    /// Run the invariant checks and print a pass/fail table.
    Validate(ValidateArgs),
    /// Parse a coefficient expression and optionally evaluate it.
    ParseCheck(ParseCheckArgs),
}

#[derive(Debug, Args)]
#[group(id = "coefficient", required = true, multiple = false)]
pub struct CoefficientArgs {
    /// Coefficient a(x) as an expression in x
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Constant coefficient a0
    #[arg(long, allow_hyphen_values = true)]
    pub a0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub coefficient: CoefficientArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// y(x0), nonzero
    #[arg(long, allow_hyphen_values = true)]
    pub q: f64,
    /// y'(x0)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

impl ProblemArgs {
    pub fn coefficient(&self) -> Result<CoefficientSpec> {
        match (&self.coefficient.a, self.coefficient.a0) {
            (Some(text), _) => Ok(parse_coefficient(text)?),
            (None, Some(a0)) => Ok(CoefficientSpec::Constant(a0)),
            (None, None) => unreachable!("clap requires one of --a, --a0"),
        }
    }

    pub fn problem(&self) -> Result<PinneyProblem> {
        validate_problem(self.coefficient()?, self.c, self.x0, self.q, self.p)
    }

    pub fn config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(t) = self.rel_tol {
            cfg.rel_tol = t;
        }
        if let Some(t) = self.abs_tol {
            cfg.abs_tol = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Superposition,
    ClosedForm,
    Direct,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Superposition => Method::Superposition,
            MethodArg::ClosedForm => Method::ClosedForm,
            MethodArg::Direct => Method::Direct,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SingularitiesArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Bracket width at which bisection stops
    #[arg(long, default_value_t = 1e-10)]
    pub refine_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct ParseCheckArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    /// Evaluate at this x
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<f64>,
}
