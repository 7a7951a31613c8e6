//! The fundamental pair `(u, v)` of `y'' + a(x) y = 0`.
//!
//! `u(x0) = q, u'(x0) = p` and `v(x0) = 0, v'(x0) = 1/q`, integrated together as
//! one 4-dimensional system so both members share every step and coefficient
//! evaluation.

use serde::Serialize;

use crate::error::{PinneyError, Result};
use crate::expr::CoefficientSpec;
use crate::problem::{PinneyProblem, SolverConfig};
use crate::rk::{self, DenseTrajectory, Stop, System};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalPairState {
    pub x: f64,
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
}

impl FundamentalPairState {
    fn from_vec(x: f64, y: [f64; 4]) -> Self {
        let [u, du, v, dv] = y;
        Self { x, u, du, v, dv }
    }

    fn to_vec(self) -> [f64; 4] {
        [self.u, self.du, self.v, self.dv]
    }
}

/// `W = u v' - u' v`, which equals 1 for the pair's initial data.
pub fn wronskian(state: &FundamentalPairState) -> f64 {
    state.u * state.dv - state.du * state.v
}

pub fn init_pair(problem: &PinneyProblem) -> FundamentalPairState {
    FundamentalPairState {
        x: problem.x0(),
        u: problem.q(),
        du: problem.p(),
        v: 0.0,
        dv: 1.0 / problem.q(),
    }
}

pub(crate) struct PairSystem<'a> {
    pub coeff: &'a CoefficientSpec,
}

impl System<4> for PairSystem<'_> {
    fn rhs(&self, x: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let a = self
            .coeff
            .eval(x)
            .map_err(|source| PinneyError::CoefficientEvalFailed { x, source })?;
        Ok([y[1], -a * y[0], y[3], -a * y[2]])
    }
}

/// Dense solution of the pair on a closed interval containing `x0`.
#[derive(Debug, Clone)]
pub struct DensePairSolution {
    x0: f64,
    /// Integration towards smaller x, if any.
    backward: Option<DenseTrajectory<4>>,
    /// Integration towards larger x, if any.
    forward: Option<DenseTrajectory<4>>,
    init: FundamentalPairState,
}

impl DensePairSolution {
    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn bounds(&self) -> (f64, f64) {
        let lo = self.backward.as_ref().map_or(self.x0, |t| t.bounds().0);
        let hi = self.forward.as_ref().map_or(self.x0, |t| t.bounds().1);
        (lo, hi)
    }

    pub fn eval(&self, x: f64) -> Result<FundamentalPairState> {
        eval_pair(self, x)
    }

    /// States at every accepted step endpoint, ordered by x, starting value included.
    pub fn step_states(&self) -> Vec<FundamentalPairState> {
        let mut out = Vec::new();
        if let Some(back) = &self.backward {
            out.extend(
                back.steps
                    .iter()
                    .rev()
                    .map(|s| FundamentalPairState::from_vec(s.x_end, s.y_end)),
            );
        }
        out.push(self.init);
        if let Some(fwd) = &self.forward {
            out.extend(
                fwd.steps
                    .iter()
                    .map(|s| FundamentalPairState::from_vec(s.x_end, s.y_end)),
            );
        }
        out
    }

    /// Accepted step intervals `(x_lo, x_hi)` ordered by x.
    pub fn step_intervals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if let Some(back) = &self.backward {
            out.extend(back.steps.iter().rev().map(|s| (s.x_end, s.x_start)));
        }
        if let Some(fwd) = &self.forward {
            out.extend(fwd.steps.iter().map(|s| (s.x_start, s.x_end)));
        }
        out
    }

    pub fn max_step(&self) -> f64 {
        let b = self.backward.as_ref().map_or(0.0, |t| t.max_step());
        let f = self.forward.as_ref().map_or(0.0, |t| t.max_step());
        b.max(f)
    }
}

fn run(problem: &PinneyProblem, x_target: f64, config: &SolverConfig) -> Result<DenseTrajectory<4>> {
    let system = PairSystem { coeff: problem.coeff() };
    let init = init_pair(problem);
    let traj = rk::integrate(&system, init.x, init.to_vec(), x_target, config, |_, _| true)?;
    if traj.stop == Stop::StepCollapse {
        let x = traj.x_end();
        let dir = (x_target - init.x).signum();
        if let Some(err) = locate_coefficient_failure(problem.coeff(), x, dir) {
            return Err(err);
        }
        return Err(PinneyError::StepSizeCollapse {
            x,
            step: 16.0 * x.abs().max(f64::MIN_POSITIVE) * f64::EPSILON,
        });
    }
    Ok(traj)
}

/// After a step collapse at `x`, looks just ahead for the point where the
/// coefficient stops being evaluable or passes through a pole.
fn locate_coefficient_failure(coeff: &CoefficientSpec, x: f64, dir: f64) -> Option<PinneyError> {
    let a_here = coeff.eval(x).ok()?;
    let bad = |t: f64| match coeff.eval(t) {
        Ok(a) => a.signum() != a_here.signum(),
        Err(_) => true,
    };
    let scale = x.abs().max(1.0);
    let mut width = 1e-12 * scale;
    let mut far = None;
    while width <= 1e-3 * scale {
        let t = x + dir * width;
        if bad(t) {
            far = Some(t);
            break;
        }
        width *= 10.0;
    }
    let (mut good, mut far) = (x, far?);
    loop {
        let mid = 0.5 * (good + far);
        if mid == good || mid == far {
            break;
        }
        if bad(mid) {
            far = mid;
        } else {
            good = mid;
        }
    }
    match coeff.eval(far) {
        Err(source) => Some(PinneyError::CoefficientEvalFailed { x: far, source }),
        // A sign flip between adjacent doubles with huge magnitude is a pole that
        // no double lands on exactly.
        Ok(_) if coeff.eval(good).is_ok_and(|a| a.abs() > 1.0 / f64::EPSILON.sqrt()) => {
            Some(PinneyError::CoefficientEvalFailed {
                x: far,
                source: crate::error::ExprError::EvalDomain {
                    x: Some(far),
                    message: "coefficient is unbounded (pole)".into(),
                },
            })
        }
        Ok(_) => None,
    }
}

/// Integrates the pair from `x0` to `x_target` (either direction).
pub fn integrate_pair(problem: &PinneyProblem, x_target: f64, config: &SolverConfig) -> Result<DensePairSolution> {
    integrate_pair_over(problem, x_target.min(problem.x0()), x_target.max(problem.x0()), config)
}

/// Integrates the pair on both sides of `x0` so the solution covers `[x_lo, x_hi]`.
pub fn integrate_pair_over(
    problem: &PinneyProblem,
    x_lo: f64,
    x_hi: f64,
    config: &SolverConfig,
) -> Result<DensePairSolution> {
    config.validate()?;
    if !(x_lo.is_finite() && x_hi.is_finite()) {
        return Err(PinneyError::NonFinite("integration bound"));
    }
    let x0 = problem.x0();
    if x_lo > x0 || x_hi < x0 {
        return Err(PinneyError::InvalidArgument(format!(
            "interval [{x_lo}, {x_hi}] must contain x0={x0}"
        )));
    }
    let backward = (x_lo < x0).then(|| run(problem, x_lo, config)).transpose()?;
    let forward = (x_hi > x0).then(|| run(problem, x_hi, config)).transpose()?;
    Ok(DensePairSolution {
        x0,
        backward,
        forward,
        init: init_pair(problem),
    })
}

/// Dense-output evaluation of all four components at `x`.
pub fn eval_pair(sol: &DensePairSolution, x: f64) -> Result<FundamentalPairState> {
    let (lo, hi) = sol.bounds();
    if !(lo <= x && x <= hi) {
        return Err(PinneyError::OutOfRange { x, lo, hi });
    }
    if x == sol.x0 {
        return Ok(sol.init);
    }
    let traj = if x < sol.x0 { &sol.backward } else { &sol.forward };
    let traj = traj.as_ref().expect("bounds guarantee a trajectory on this side");
    Ok(FundamentalPairState::from_vec(x, traj.eval(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_coefficient;
    use crate::problem::validate_problem;
    use std::f64::consts::PI;

    fn problem(a: &str, q: f64, p: f64, x0: f64) -> PinneyProblem {
        validate_problem(parse_coefficient(a).unwrap(), 1.0, x0, q, p).unwrap()
    }

    /// Fixed-step classical RK4 on the pair, independent of the adaptive stepper.
    fn rk4_reference(a: &CoefficientSpec, x0: f64, y0: [f64; 4], x1: f64, n: usize) -> [f64; 4] {
        let f = |x: f64, y: [f64; 4]| {
            let ax = a.eval(x).unwrap();
            [y[1], -ax * y[0], y[3], -ax * y[2]]
        };
        let h = (x1 - x0) / n as f64;
        let mut y = y0;
        for i in 0..n {
            let x = x0 + i as f64 * h;
            let k1 = f(x, y);
            let k2 = f(x + h / 2.0, std::array::from_fn(|j| y[j] + h / 2.0 * k1[j]));
            let k3 = f(x + h / 2.0, std::array::from_fn(|j| y[j] + h / 2.0 * k2[j]));
            let k4 = f(x + h, std::array::from_fn(|j| y[j] + h * k3[j]));
            y = std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        }
        y
    }

    #[test]
    fn init_examples() {
        let s = init_pair(&problem("1", 1.0, 0.0, 0.0));
        assert_eq!((s.x, s.u, s.du, s.v, s.dv), (0.0, 1.0, 0.0, 0.0, 1.0));
        let s = init_pair(&problem("1", 2.0, 3.0, 5.0));
        assert_eq!((s.x, s.u, s.du, s.v, s.dv), (5.0, 2.0, 3.0, 0.0, 0.5));
        assert_eq!(wronskian(&s), 1.0);
        let s = init_pair(&problem("1", -1.0, 0.0, 0.0));
        assert_eq!((s.u, s.dv), (-1.0, -1.0));
    }

    #[test]
    fn wronskian_of_trig_pair() {
        for t in [0.0, 0.3, 1.7, -4.2] {
            let s = FundamentalPairState {
                x: t,
                u: f64::cos(t),
                du: -f64::sin(t),
                v: f64::sin(t),
                dv: f64::cos(t),
            };
            assert!((wronskian(&s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn harmonic_pair_matches_trig() {
        let cfg = SolverConfig::default();
        let sol = integrate_pair(&problem("1", 1.0, 0.0, 0.0), PI, &cfg).unwrap();
        let end = sol.eval(PI).unwrap();
        assert!((end.u + 1.0).abs() < 1e-9);
        assert!(end.v.abs() < 1e-9);
        let mid = sol.eval(PI / 2.0).unwrap();
        assert!(mid.u.abs() < 1e-9);
        assert!((mid.v - 1.0).abs() < 1e-9);
        assert_eq!(sol.eval(0.0).unwrap(), init_pair(&problem("1", 1.0, 0.0, 0.0)));
        assert!(matches!(sol.eval(-0.1), Err(PinneyError::OutOfRange { .. })));
        assert!(matches!(sol.eval(3.2), Err(PinneyError::OutOfRange { .. })));
    }

    #[test]
    fn zero_coefficient_is_exact() {
        let cfg = SolverConfig::default();
        let sol = integrate_pair(&problem("0", 1.0, 0.0, 0.0), 10.0, &cfg).unwrap();
        for s in sol.step_states() {
            assert_eq!(s.u, 1.0);
            assert_eq!(s.du, 0.0);
            assert!((s.v - s.x).abs() <= 1e-14 * s.x.abs().max(1.0));
        }
    }

    #[test]
    fn pole_in_coefficient_is_reported() {
        let cfg = SolverConfig::default();
        let err = integrate_pair(&problem("1/(x-1)", 1.0, 0.0, 0.0), 2.0, &cfg).unwrap_err();
        match err {
            PinneyError::CoefficientEvalFailed { x, .. } => assert_eq!(x, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn backward_integration() {
        let cfg = SolverConfig::default();
        let sol = integrate_pair(&problem("1", 1.0, 0.0, 0.0), -2.0, &cfg).unwrap();
        let s = sol.eval(-2.0).unwrap();
        assert!((s.u - f64::cos(-2.0)).abs() < 1e-9);
        assert!((s.v - f64::sin(-2.0)).abs() < 1e-9);
        assert_eq!(sol.bounds(), (-2.0, 0.0));
    }

    #[test]
    fn liouville_constancy_against_rk4() {
        let cfg = SolverConfig::default();
        let prob = problem("1 + 0.5*sin(x)", 1.0, 0.0, 0.0);
        let sol = integrate_pair(&prob, 20.0, &cfg).unwrap();
        for s in sol.step_states() {
            assert!((wronskian(&s) - 1.0).abs() < 1e-9, "x={}", s.x);
        }
        let reference = rk4_reference(prob.coeff(), 0.0, [1.0, 0.0, 0.0, 1.0], 20.0, 40_000);
        let ref_state = FundamentalPairState::from_vec(20.0, reference);
        assert!((wronskian(&ref_state) - 1.0).abs() < 1e-9);
        let end = sol.eval(20.0).unwrap();
        assert!((end.u - ref_state.u).abs() < 1e-8);
        assert!((end.v - ref_state.v).abs() < 1e-8);
    }

    #[test]
    fn wronskian_drift_bound() {
        let cfg = SolverConfig::default();
        for a in ["1", "1 + 0.5*sin(x)", "x", "0", "-1"] {
            let prob = problem(a, 1.0, 0.3, 0.0);
            let (lo, hi) = if a == "-1" { (-4.0, 4.0) } else { (-5.0, 15.0) };
            let (lo, hi) = if a == "x" { (0.0, 20.0) } else { (lo, hi) };
            let sol = integrate_pair_over(&prob, lo, hi, &cfg).unwrap();
            let bound = 100.0 * cfg.rel_tol * (1.0 + (hi - lo));
            for s in sol.step_states() {
                assert!(
                    (wronskian(&s) - 1.0).abs() <= bound,
                    "a={a} x={} W={}",
                    s.x,
                    wronskian(&s)
                );
            }
        }
    }

    #[test]
    fn linearity_in_initial_data() {
        let cfg = SolverConfig::default();
        let prob = problem("1 + 0.5*sin(x)", 1.0, 0.4, 0.0);
        let base = integrate_pair(&prob, 10.0, &cfg).unwrap();
        let grid: Vec<f64> = base.step_states().iter().map(|s| s.x).collect();
        let system = PairSystem { coeff: prob.coeff() };
        for lambda in [2.0, -3.0] {
            let y0 = [lambda * 1.0, lambda * 0.4, 0.0, 1.0];
            let scaled = rk::step_through(&system, &grid, y0).unwrap();
            for (s, y) in base.step_states().iter().zip(&scaled) {
                let close = |p: f64, q: f64| (p - q).abs() <= 1e-12 * p.abs().max(q.abs()).max(1.0);
                assert!(close(lambda * s.u, y[0]) && close(lambda * s.du, y[1]), "x={}", s.x);
                assert!(close(s.v, y[2]) && close(s.dv, y[3]), "x={}", s.x);
            }
            // An independent adaptive run only agrees to tolerance level.
            let other = integrate_pair(&problem("1 + 0.5*sin(x)", lambda, 0.4 * lambda, 0.0), 10.0, &cfg).unwrap();
            let a = base.eval(10.0).unwrap();
            let b = other.eval(10.0).unwrap();
            assert!((lambda * a.u - b.u).abs() < 1e-8 * lambda.abs());
            assert!((a.v - lambda * b.v).abs() < 1e-8);
        }
    }

    #[test]
    fn time_reversal() {
        let cfg = SolverConfig::default();
        let prob = problem("1 + 0.5*sin(x)", 1.0, 0.2, 0.0);
        let there = integrate_pair(&prob, 6.0, &cfg).unwrap().eval(6.0).unwrap();
        let coeff = prob.coeff().clone();
        let system = PairSystem { coeff: &coeff };
        let back = rk::integrate(&system, 6.0, there.to_vec(), 0.0, &cfg, |_, _| true).unwrap();
        let y = back.y_end();
        let start = init_pair(&prob).to_vec();
        for i in 0..4 {
            assert!(
                (y[i] - start[i]).abs() <= 10.0 * cfg.rel_tol * start[i].abs().max(1.0),
                "{y:?}"
            );
        }
    }
}
