//! The superposition formula `y = ±sqrt(u^2 - c v^2)` and the end-to-end solver.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::constcoeff::{closed_form_pair, y_from_z, z_closed_form};
use crate::error::{PinneyError, Result};
use crate::linode::{integrate_pair_over, FundamentalPairState};
use crate::oracle::integrate_direct_over;
use crate::problem::{Branch, PinneyProblem, SampleMethod, SolutionSample, SolverConfig};
use crate::singular::{locate, SingularityReport};

/// Bisection width used when `solve` locates singular points.
pub const SOLVE_REFINE_TOL: f64 = 1e-12;

/// The radicand `u^2 - c v^2` at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discriminant {
    pub x: f64,
    pub value: f64,
}

impl Discriminant {
    pub fn of(state: &FundamentalPairState, c: f64) -> Self {
        Self {
            x: state.x,
            value: state.u * state.u - c * state.v * state.v,
        }
    }

    /// Rounding bound for `value`; anything at or below it is treated as zero.
    fn noise(state: &FundamentalPairState, c: f64) -> f64 {
        4.0 * f64::EPSILON * (state.u * state.u + c.abs() * state.v * state.v)
    }
}

fn checked_discriminant(state: &FundamentalPairState, c: f64) -> Result<f64> {
    let d = Discriminant::of(state, c);
    if d.value.is_nan() || d.value <= Discriminant::noise(state, c) {
        return Err(PinneyError::SingularOrInvalid {
            x: state.x,
            discriminant: d.value,
        });
    }
    Ok(d.value)
}

/// `y = branch * sqrt(u^2 - c v^2)` and `y' = (u u' - c v v') / y`.
pub fn compose_solution(state: &FundamentalPairState, c: f64, branch: Branch) -> Result<SolutionSample> {
    let disc = checked_discriminant(state, c)?;
    let y = branch.sign() * disc.sqrt();
    Ok(SolutionSample {
        x: state.x,
        y,
        dy: (state.u * state.du - c * state.v * state.dv) / y,
        method: SampleMethod::Superposition,
    })
}

/// `y'' + a y + c / y^3` for the composed solution.
///
/// `y''` comes from differentiating `y y' = u u' - c v v'` with `u'' = -a u`,
/// `v'' = -a v`. The result equals `-c (W^2 - 1) / y^3` for the state's Wronskian `W`.
pub fn residual(state: &FundamentalPairState, a_at_x: f64, c: f64, branch: Branch) -> Result<f64> {
    let s = compose_solution(state, c, branch)?;
    let (y, dy) = (s.y, s.dy);
    let ddy = ((state.du * state.du - c * state.dv * state.dv) - a_at_x * y * y - dy * dy) / y;
    Ok(ddy + a_at_x * y + c / (y * y * y))
}

/// Requested solution method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form for constant coefficients, superposition otherwise.
    #[default]
    Auto,
    Superposition,
    ClosedForm,
    Direct,
}

impl FromStr for Method {
    type Err = PinneyError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Method::Auto,
            "superposition" => Method::Superposition,
            "closed-form" | "closed_form" => Method::ClosedForm,
            "direct" => Method::Direct,
            other => return Err(PinneyError::InvalidArgument(format!("unknown method `{other}`"))),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Superposition => "superposition",
            Method::ClosedForm => "closed-form",
            Method::Direct => "direct",
        })
    }
}

/// One emitted sample with whatever by-products the method defines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolvedPoint {
    pub sample: SolutionSample,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub discriminant: Option<f64>,
    pub residual: Option<f64>,
    /// `0 < discriminant < abs_tol^2`: the square root amplifies errors here.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutput {
    pub method: SampleMethod,
    pub points: Vec<SolvedPoint>,
    /// Singular point (or direct-integration stop) below `x0` that cut the grid.
    pub truncated_below: Option<f64>,
    pub truncated_above: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singularities: Option<SingularityReport>,
}

impl SolveOutput {
    pub fn samples(&self) -> impl Iterator<Item = &SolutionSample> {
        self.points.iter().map(|p| &p.sample)
    }

    pub fn truncated_at(&self) -> Vec<f64> {
        self.truncated_below.into_iter().chain(self.truncated_above).collect()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated_below.is_some() || self.truncated_above.is_some()
    }
}

/// `n` evenly spaced points from `lo` to `hi`, both ends exact.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Samples the solution on a uniform grid over `[x_from, x_to]`.
///
/// Samples beyond a singular point (or beyond where direct integration had to
/// stop) are dropped and the cut is reported in the output.
pub fn solve(
    problem: &PinneyProblem,
    x_from: f64,
    x_to: f64,
    n_samples: usize,
    config: &SolverConfig,
    method: Method,
) -> Result<SolveOutput> {
    config.validate()?;
    if !(x_from.is_finite() && x_to.is_finite()) {
        return Err(PinneyError::NonFinite("sample range"));
    }
    if !(x_from <= problem.x0() && problem.x0() <= x_to) {
        return Err(PinneyError::InvalidArgument(format!(
            "x0={} must lie in [{x_from}, {x_to}]",
            problem.x0()
        )));
    }
    if n_samples < 2 {
        return Err(PinneyError::InvalidArgument("at least 2 samples are required".into()));
    }
    let grid = uniform_grid(x_from, x_to, n_samples);
    let method = match method {
        Method::Auto if problem.constant_coefficient().is_some() => Method::ClosedForm,
        Method::Auto => Method::Superposition,
        m => m,
    };
    match method {
        Method::Superposition => solve_superposition(problem, &grid, config),
        Method::ClosedForm => solve_closed_form(problem, &grid, config),
        Method::Direct => solve_direct(problem, &grid, config),
        Method::Auto => unreachable!(),
    }
}

fn inside(report: Option<&SingularityReport>, x: f64) -> bool {
    match report {
        None => true,
        Some(r) => {
            let above_lower = r.lower().map_or(x >= r.domain.0, |s| x > s);
            let below_upper = r.upper().map_or(x <= r.domain.1, |s| x < s);
            above_lower && below_upper
        }
    }
}

fn solve_superposition(problem: &PinneyProblem, grid: &[f64], config: &SolverConfig) -> Result<SolveOutput> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let c = problem.c();
    let sol = integrate_pair_over(problem, lo, hi, config)?;
    let report = (c > 0.0)
        .then(|| locate(&sol, c, problem.x0(), lo, hi, SOLVE_REFINE_TOL))
        .transpose()?;
    let mut points = Vec::with_capacity(grid.len());
    for &x in grid {
        if !inside(report.as_ref(), x) {
            continue;
        }
        let state = sol.eval(x)?;
        let sample = match compose_solution(&state, c, problem.branch()) {
            Ok(s) => s,
            Err(PinneyError::SingularOrInvalid { .. }) if report.as_ref().is_some_and(|r| !r.points.is_empty()) => {
                continue
            }
            Err(e) => return Err(e),
        };
        let a = problem
            .coeff()
            .eval(x)
            .map_err(|source| PinneyError::CoefficientEvalFailed { x, source })?;
        let disc = Discriminant::of(&state, c).value;
        points.push(SolvedPoint {
            sample,
            u: Some(state.u),
            v: Some(state.v),
            discriminant: Some(disc),
            residual: Some(residual(&state, a, c, problem.branch())?),
            low_confidence: disc < config.abs_tol * config.abs_tol,
        });
    }
    Ok(SolveOutput {
        method: SampleMethod::Superposition,
        points,
        truncated_below: report.as_ref().and_then(|r| r.lower()),
        truncated_above: report.as_ref().and_then(|r| r.upper()),
        singularities: report,
    })
}

fn solve_closed_form(problem: &PinneyProblem, grid: &[f64], config: &SolverConfig) -> Result<SolveOutput> {
    let a0 = problem
        .constant_coefficient()
        .ok_or(PinneyError::MethodUnavailable("closed-form"))?;
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let (c, q, p, x0) = (problem.c(), problem.q(), problem.p(), problem.x0());
    let pair = closed_form_pair(a0, q, p, x0);
    let zf = z_closed_form(a0, c, q, p, x0);
    let report = (c > 0.0)
        .then(|| locate(&pair, c, x0, lo, hi, SOLVE_REFINE_TOL))
        .transpose()?;
    let mut points = Vec::with_capacity(grid.len());
    for &x in grid {
        if !inside(report.as_ref(), x) {
            continue;
        }
        let sample = match y_from_z(&zf, problem.branch(), x) {
            Ok(s) => s,
            Err(PinneyError::SingularOrInvalid { .. }) if report.as_ref().is_some_and(|r| !r.points.is_empty()) => {
                continue
            }
            Err(e) => return Err(e),
        };
        let state = pair.state_at(x);
        let z = zf.z(x);
        points.push(SolvedPoint {
            sample,
            u: Some(state.u),
            v: Some(state.v),
            discriminant: Some(z),
            residual: residual(&state, a0, c, problem.branch()).ok(),
            low_confidence: z < config.abs_tol * config.abs_tol,
        });
    }
    Ok(SolveOutput {
        method: SampleMethod::ClosedForm,
        points,
        truncated_below: report.as_ref().and_then(|r| r.lower()),
        truncated_above: report.as_ref().and_then(|r| r.upper()),
        singularities: report,
    })
}

fn solve_direct(problem: &PinneyProblem, grid: &[f64], config: &SolverConfig) -> Result<SolveOutput> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let direct = integrate_direct_over(problem, lo, hi, config)?;
    let below = direct.stopped_below();
    let above = direct.stopped_above();
    let (cov_lo, cov_hi) = direct.bounds();
    let points = grid
        .iter()
        .filter(|&&x| x >= cov_lo && x <= cov_hi)
        .map(|&x| {
            Ok(SolvedPoint {
                sample: direct.eval(x)?,
                u: None,
                v: None,
                discriminant: None,
                residual: None,
                low_confidence: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveOutput {
        method: SampleMethod::Direct,
        points,
        truncated_below: below,
        truncated_above: above,
        singularities: None,
    })
}

/// Largest `|y_superposition - y_closed_form|` over a uniform grid, counting only
/// samples where both discriminants exceed `min_discriminant`.
pub fn method_agreement(
    problem: &PinneyProblem,
    x_from: f64,
    x_to: f64,
    n: usize,
    config: &SolverConfig,
    min_discriminant: f64,
) -> Result<f64> {
    let sup = solve(problem, x_from, x_to, n, config, Method::Superposition)?;
    let cf = solve(problem, x_from, x_to, n, config, Method::ClosedForm)?;
    let mut worst: f64 = 0.0;
    for a in &sup.points {
        let Some(b) = cf.points.iter().find(|b| b.sample.x == a.sample.x) else {
            continue;
        };
        let ok = |p: &SolvedPoint| p.discriminant.is_some_and(|d| d > min_discriminant);
        if ok(a) && ok(b) {
            worst = worst.max((a.sample.y - b.sample.y).abs());
        }
    }
    Ok(worst)
}
