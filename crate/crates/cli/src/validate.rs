//! Invariant battery behind `pinney validate`.
//!
//! Thresholds are the nominal accuracy targets plus a rounding allowance. The pair
//! is stored in doubles, so `u v' - u' v` and `u^2 - c v^2` carry errors of about
//! `eps * (u^2 + |c| v^2 + |u v'| + |u' v|)` no matter how accurate the integration
//! was; for growing solutions that term dominates.

use pinney_core::constcoeff::energy_at;
use pinney_core::{
    cross_validate, energy_constant, integrate_direct_over, integrate_pair_over, method_agreement, solve, wronskian,
    Method, PinneyProblem, Result, SolverConfig,
};
use serde::Serialize;

const ROUNDING_SAFETY: f64 = 16.0;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self {
            name,
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }
}

pub fn run_checks(problem: &PinneyProblem, lo: f64, hi: f64, n: usize, cfg: &SolverConfig) -> Result<Vec<Check>> {
    let c = problem.c();
    let pair = integrate_pair_over(problem, lo, hi, cfg)?;
    let states = pair.step_states();
    let scale = states
        .iter()
        .map(|s| s.u * s.u + c.abs() * s.v * s.v + (s.u * s.dv).abs() + (s.du * s.v).abs())
        .fold(0.0, f64::max);
    let rounding = ROUNDING_SAFETY * f64::EPSILON * scale;

    let mut checks = Vec::new();
    let drift = states.iter().map(|s| (wronskian(s) - 1.0).abs()).fold(0.0, f64::max);
    checks.push(Check::new("wronskian drift", drift, 1e-9 + rounding));

    // residual = -c (W^2 - 1) / y^3, so the allowance is scaled pointwise
    let sup = solve(problem, lo, hi, n, cfg, Method::Superposition)?;
    let worst = sup
        .points
        .iter()
        .filter_map(|p| {
            let r = p.residual?.abs();
            let bound = 1e-7 + 2.0 * c.abs() * rounding / p.sample.y.abs().powi(3);
            Some((r, bound))
        })
        .max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)));
    let (r, bound) = worst.unwrap_or((0.0, 1e-7));
    checks.push(Check::new("residual max", r, bound));

    if problem.constant_coefficient().is_some() {
        // compared only where the discriminant exceeds 1e-4, i.e. |y| > 1e-2
        let agreement = method_agreement(problem, lo, hi, n, cfg, 1e-4)?;
        checks.push(Check::new("method agreement", agreement, 1e-9 + rounding / 1e-2));
    }

    let cv = cross_validate(problem, lo, hi, n, cfg)?;
    let guard_y = (10.0 * cfg.singularity_floor).sqrt();
    checks.push(Check::new("cross-validation", cv.max_dy, 1e-7 + rounding / guard_y));

    if let Some(a0) = problem.constant_coefficient() {
        let e = energy_constant(a0, c, problem.q(), problem.p()).value();
        let direct = integrate_direct_over(problem, lo, hi, cfg)?;
        let drift = direct
            .legs()
            .flat_map(|leg| leg.samples.iter())
            .filter(|s| s.y.abs() >= 0.1)
            .map(|s| (energy_at(a0, c, s.y, s.dy) - e).abs())
            .fold(0.0, f64::max);
        checks.push(Check::new("energy drift", drift, 1e-8 * (1.0 + e.abs())));
    }
    Ok(checks)
}

pub fn table(checks: &[Check]) -> String {
    let mut s = format!("{:<18} {:>12} {:>12}  result\n", "check", "measured", "threshold");
    for c in checks {
        s += &format!(
            "{:<18} {:>12.3e} {:>12.3e}  {}\n",
            c.name,
            c.measured,
            c.threshold,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    s
}
