//! Direct integration of the nonlinear equation, used as an independent check on
//! the superposition and closed-form paths.

use serde::Serialize;

use crate::constcoeff::{energy_at, energy_constant};
use crate::error::{PinneyError, Result};
use crate::expr::CoefficientSpec;
use crate::pinney::{solve, Method};
use crate::problem::{Branch, PinneyProblem, SampleMethod, SolutionSample, SolverConfig};
use crate::rk::{self, DenseTrajectory, Stop, System};

struct DirectSystem<'a> {
    coeff: &'a CoefficientSpec,
    c: f64,
}

impl System<2> for DirectSystem<'_> {
    fn rhs(&self, x: f64, s: &[f64; 2]) -> Result<[f64; 2]> {
        let a = self
            .coeff
            .eval(x)
            .map_err(|source| PinneyError::CoefficientEvalFailed { x, source })?;
        let y = s[0];
        Ok([s[1], -a * y - self.c / (y * y * y)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTarget,
    SingularityFloor,
    StepCollapse,
}

/// One-directional direct integration from `x0`.
#[derive(Debug, Clone)]
pub struct DirectTrajectory {
    /// Accepted step endpoints, starting at `x0`, ordered along the integration.
    pub samples: Vec<SolutionSample>,
    pub terminated: Termination,
    dense: DenseTrajectory<2>,
    constant: Option<f64>,
    c: f64,
    energy: Option<f64>,
}

impl DirectTrajectory {
    pub fn x_end(&self) -> f64 {
        self.dense.x_end()
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.dense.bounds()
    }

    /// Dense-output sample at `x` inside the covered interval.
    pub fn eval(&self, x: f64) -> Result<SolutionSample> {
        let [y, dy] = self.dense.eval(x)?;
        Ok(SolutionSample {
            x,
            y,
            dy,
            method: SampleMethod::Direct,
        })
    }

    /// `E` for constant-coefficient problems.
    pub fn reference_energy(&self) -> Option<f64> {
        self.energy
    }
}

/// Integrates `y'' = -a(x) y - c / y^3` from `(x0, q, p)` to `x_target`.
///
/// Stops early with [`Termination::SingularityFloor`] when `|y|` would fall below
/// `config.singularity_floor` (or change sign) and the step cannot be shortened further.
pub fn integrate_direct(problem: &PinneyProblem, x_target: f64, config: &SolverConfig) -> Result<DirectTrajectory> {
    config.validate()?;
    if !x_target.is_finite() {
        return Err(PinneyError::NonFinite("x_target"));
    }
    let system = DirectSystem {
        coeff: problem.coeff(),
        c: problem.c(),
    };
    let branch = problem.branch();
    let floor = config.singularity_floor;
    let monitor = |_: f64, s: &[f64; 2]| s[0].abs() >= floor && Branch::of(s[0]) == branch;
    let dense = rk::integrate(
        &system,
        problem.x0(),
        [problem.q(), problem.p()],
        x_target,
        config,
        monitor,
    )?;
    let terminated = match dense.stop {
        Stop::ReachedTarget => Termination::ReachedTarget,
        Stop::Monitor => Termination::SingularityFloor,
        Stop::StepCollapse if dense.monitor_tripped_on_trial || blowing_up(&dense) => Termination::SingularityFloor,
        Stop::StepCollapse => Termination::StepCollapse,
    };
    let to_sample = |x: f64, s: [f64; 2]| SolutionSample {
        x,
        y: s[0],
        dy: s[1],
        method: SampleMethod::Direct,
    };
    let mut samples = vec![to_sample(dense.x_start, dense.y_start)];
    samples.extend(dense.steps.iter().map(|st| to_sample(st.x_end, st.y_end)));
    let constant = problem.constant_coefficient();
    Ok(DirectTrajectory {
        samples,
        terminated,
        dense,
        constant,
        c: problem.c(),
        energy: constant.map(|a0| energy_constant(a0, problem.c(), problem.q(), problem.p()).value()),
    })
}

/// Near a zero of `y` the solution behaves like `sqrt(k |x - x*|)`, so `|y / y'|` is
/// twice the distance left. The floor on `|y|` can sit closer to `x*` than one ulp of
/// `x`, in which case the step collapses first; a tiny `|y / y'|` identifies that case.
fn blowing_up(dense: &DenseTrajectory<2>) -> bool {
    let [y, dy] = dense.y_end();
    let x = dense.x_end();
    (y / dy).abs() < 1e6 * f64::EPSILON * x.abs().max(1.0)
}

/// Direct integration on both sides of `x0`.
#[derive(Debug, Clone)]
pub struct DirectSolution {
    pub backward: Option<DirectTrajectory>,
    pub forward: Option<DirectTrajectory>,
    x0: f64,
    q: f64,
    p: f64,
}

impl DirectSolution {
    pub fn bounds(&self) -> (f64, f64) {
        let lo = self.backward.as_ref().map_or(self.x0, |t| t.bounds().0);
        let hi = self.forward.as_ref().map_or(self.x0, |t| t.bounds().1);
        (lo, hi)
    }

    pub fn eval(&self, x: f64) -> Result<SolutionSample> {
        if x == self.x0 {
            return Ok(SolutionSample {
                x,
                y: self.q,
                dy: self.p,
                method: SampleMethod::Direct,
            });
        }
        let leg = if x < self.x0 { &self.backward } else { &self.forward };
        match leg {
            Some(t) => t.eval(x),
            None => {
                let (lo, hi) = self.bounds();
                Err(PinneyError::OutOfRange { x, lo, hi })
            }
        }
    }

    /// Where the backward leg stopped short of its target, if it did.
    pub fn stopped_below(&self) -> Option<f64> {
        self.backward
            .as_ref()
            .filter(|t| t.terminated != Termination::ReachedTarget)
            .map(|t| t.x_end())
    }

    pub fn stopped_above(&self) -> Option<f64> {
        self.forward
            .as_ref()
            .filter(|t| t.terminated != Termination::ReachedTarget)
            .map(|t| t.x_end())
    }

    pub fn legs(&self) -> impl Iterator<Item = &DirectTrajectory> {
        self.backward.iter().chain(self.forward.iter())
    }
}

pub fn integrate_direct_over(
    problem: &PinneyProblem,
    x_lo: f64,
    x_hi: f64,
    config: &SolverConfig,
) -> Result<DirectSolution> {
    let x0 = problem.x0();
    if x_lo > x0 || x_hi < x0 {
        return Err(PinneyError::InvalidArgument(format!(
            "interval [{x_lo}, {x_hi}] must contain x0={x0}"
        )));
    }
    let backward = (x_lo < x0)
        .then(|| integrate_direct(problem, x_lo, config))
        .transpose()?;
    let forward = (x_hi > x0)
        .then(|| integrate_direct(problem, x_hi, config))
        .transpose()?;
    Ok(DirectSolution {
        backward,
        forward,
        x0,
        q: problem.q(),
        p: problem.p(),
    })
}

/// `(x, y'^2 + a0 y^2 - c / y^2)` at every sample of a constant-coefficient trajectory.
pub fn energy_series(traj: &DirectTrajectory) -> Result<Vec<(f64, f64)>> {
    let a0 = traj.constant.ok_or(PinneyError::NotApplicable(
        "energy integral needs a constant coefficient",
    ))?;
    Ok(traj
        .samples
        .iter()
        .map(|s| (s.x, energy_at(a0, traj.c, s.y, s.dy)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossValidation {
    pub max_dy: f64,
    pub max_ddy: f64,
    /// Smallest interval holding every compared sample.
    pub range: (f64, f64),
    pub compared: usize,
    pub method: SampleMethod,
}

/// Compares `solve` (automatic method) against direct integration on a uniform grid.
///
/// Samples whose discriminant is below `10 * singularity_floor`, and samples past the
/// point where direct integration stopped, are left out.
pub fn cross_validate(
    problem: &PinneyProblem,
    x_from: f64,
    x_to: f64,
    n: usize,
    config: &SolverConfig,
) -> Result<CrossValidation> {
    let formula = solve(problem, x_from, x_to, n, config, Method::Auto)?;
    let direct = integrate_direct_over(problem, x_from, x_to, config)?;
    let (lo, hi) = direct.bounds();
    let guard = 10.0 * config.singularity_floor;

    let mut out = CrossValidation {
        max_dy: 0.0,
        max_ddy: 0.0,
        range: (f64::INFINITY, f64::NEG_INFINITY),
        compared: 0,
        method: formula.method,
    };
    for point in &formula.points {
        let s = point.sample;
        if point.discriminant.is_some_and(|d| d < guard) || s.x < lo || s.x > hi {
            continue;
        }
        // the last accepted direct state sits right at the guard; stay strictly inside
        if (direct.stopped_below() == Some(lo) && s.x == lo) || (direct.stopped_above() == Some(hi) && s.x == hi) {
            continue;
        }
        let d = direct.eval(s.x)?;
        out.max_dy = out.max_dy.max((s.y - d.y).abs());
        out.max_ddy = out.max_ddy.max((s.dy - d.dy).abs());
        out.range = (out.range.0.min(s.x), out.range.1.max(s.x));
        out.compared += 1;
    }
    Ok(out)
}
