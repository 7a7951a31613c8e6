//! Dormand–Prince 5(4) stepper with continuous (dense) output.
//!
//! Steps are signed, so integration runs in either direction. Every accepted step
//! keeps its interpolation coefficients; [`DenseTrajectory::eval`] is exact at step
//! endpoints and fourth-order accurate in between.

use crate::error::{PinneyError, Result};
use crate::problem::SolverConfig;

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Right-hand side `y' = f(x, y)` of an `N`-dimensional first-order system.
pub trait System<const N: usize> {
    fn rhs(&self, x: f64, y: &[f64; N]) -> Result<[f64; N]>;
}

/// One accepted step with its interpolation data.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub x_start: f64,
    pub x_end: f64,
    pub y_start: [f64; N],
    pub y_end: [f64; N],
    coeffs: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    pub fn h(&self) -> f64 {
        self.x_end - self.x_start
    }

    fn lo(&self) -> f64 {
        self.x_start.min(self.x_end)
    }

    fn hi(&self) -> f64 {
        self.x_start.max(self.x_end)
    }

    pub fn eval(&self, x: f64) -> [f64; N] {
        if x == self.x_start {
            return self.y_start;
        }
        if x == self.x_end {
            return self.y_end;
        }
        let theta = (x - self.x_start) / self.h();
        let theta1 = 1.0 - theta;
        let [r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| self.y_start[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))))
    }
}

/// Why an integration stopped before reaching its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    ReachedTarget,
    /// The caller's monitor rejected the next state.
    Monitor,
    StepCollapse,
}

/// Accepted steps from `x_start` in one direction.
#[derive(Debug, Clone)]
pub struct DenseTrajectory<const N: usize> {
    pub x_start: f64,
    pub y_start: [f64; N],
    pub steps: Vec<DenseStep<N>>,
    pub stop: Stop,
    /// Set once any trial state was flagged by the monitor or was non-finite.
    pub monitor_tripped_on_trial: bool,
}

impl<const N: usize> DenseTrajectory<N> {
    pub fn x_end(&self) -> f64 {
        self.steps.last().map_or(self.x_start, |s| s.x_end)
    }

    pub fn y_end(&self) -> [f64; N] {
        self.steps.last().map_or(self.y_start, |s| s.y_end)
    }

    /// Closed interval covered by the accepted steps.
    pub fn bounds(&self) -> (f64, f64) {
        let end = self.x_end();
        (self.x_start.min(end), self.x_start.max(end))
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.bounds();
        lo <= x && x <= hi
    }

    pub fn eval(&self, x: f64) -> Result<[f64; N]> {
        let (lo, hi) = self.bounds();
        if !(lo <= x && x <= hi) {
            return Err(PinneyError::OutOfRange { x, lo, hi });
        }
        if x == self.x_start {
            return Ok(self.y_start);
        }
        // Steps are monotone in x along the direction of integration.
        let forward = self.x_end() >= self.x_start;
        let idx = self
            .steps
            .partition_point(|s| if forward { s.x_end < x } else { s.x_end > x });
        let step = &self.steps[idx.min(self.steps.len() - 1)];
        debug_assert!(step.lo() <= x && x <= step.hi());
        Ok(step.eval(x))
    }

    /// Largest accepted step magnitude.
    pub fn max_step(&self) -> f64 {
        self.steps.iter().map(|s| s.h().abs()).fold(0.0, f64::max)
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

/// Integrates `system` from `(x0, y0)` towards `x_target`.
///
/// `monitor` sees every candidate state; returning `false` ends the integration
/// before that state is accepted. Non-finite right-hand sides and monitor trips on
/// trial states count as rejected steps.
pub fn integrate<const N: usize, S, M>(
    system: &S,
    x0: f64,
    y0: [f64; N],
    x_target: f64,
    config: &SolverConfig,
    mut monitor: M,
) -> Result<DenseTrajectory<N>>
where
    S: System<N>,
    M: FnMut(f64, &[f64; N]) -> bool,
{
    let mut traj = DenseTrajectory {
        x_start: x0,
        y_start: y0,
        steps: Vec::new(),
        stop: Stop::ReachedTarget,
        monitor_tripped_on_trial: false,
    };
    let span = x_target - x0;
    if span == 0.0 {
        return Ok(traj);
    }
    let dir = span.signum();
    let mut h_abs = config.initial_step.min(span.abs() / 10.0).min(config.max_step);

    let mut x = x0;
    let mut y = y0;
    let mut k1 = system.rhs(x, &y)?;
    let mut last_rejected = false;

    loop {
        let remaining = (x_target - x).abs();
        let mut last = false;
        if h_abs >= remaining {
            h_abs = remaining;
            last = true;
        }
        let min_step = 16.0 * ulp(x);
        if h_abs < min_step && !last {
            traj.stop = Stop::StepCollapse;
            return Ok(traj);
        }
        let h = dir * h_abs;

        let trial = try_step(system, x, &y, &k1, h);
        let (y_new, k7, err_vec, ks) = match trial {
            Ok(t) => t,
            Err(e @ PinneyError::CoefficientEvalFailed { .. }) => return Err(e),
            Err(_) => {
                traj.monitor_tripped_on_trial = true;
                h_abs *= MIN_FACTOR;
                last_rejected = true;
                continue;
            }
        };

        if y_new.iter().any(|v| !v.is_finite()) {
            traj.monitor_tripped_on_trial = true;
            h_abs *= MIN_FACTOR;
            last_rejected = true;
            continue;
        }
        let x_new = if last { x_target } else { x + h };
        if !monitor(x_new, &y_new) {
            // Rejected on a step that is already tiny ends the run; otherwise shrink
            // and approach the flagged region more carefully.
            if h_abs <= 2.0 * min_step.max(16.0 * ulp(x_new)) {
                traj.stop = Stop::Monitor;
                return Ok(traj);
            }
            traj.monitor_tripped_on_trial = true;
            h_abs *= 0.5;
            last_rejected = true;
            continue;
        }

        let err = error_norm(&y, &y_new, &err_vec, config);
        if !err.is_finite() {
            h_abs *= MIN_FACTOR;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            let [_, k3, k4, k5, k6] = &ks;
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let r4: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]);
            let r5: [f64; N] = std::array::from_fn(|i| {
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            });
            traj.steps.push(DenseStep {
                x_start: x,
                x_end: x_new,
                y_start: y,
                y_end: y_new,
                coeffs: [ydiff, bspl, r4, r5],
            });
            x = x_new;
            y = y_new;
            k1 = k7;
            if last {
                return Ok(traj);
            }
            let mut factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h_abs = (h_abs * factor).min(config.max_step);
            last_rejected = false;
        } else {
            let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            h_abs *= factor;
            last_rejected = true;
        }
    }
}

/// Applies one unchecked step per consecutive pair of `xs`, starting from `y0` at `xs[0]`.
///
/// Replaying an adaptive run's step grid makes two integrations directly comparable.
pub fn step_through<const N: usize, S: System<N>>(system: &S, xs: &[f64], y0: [f64; N]) -> Result<Vec<[f64; N]>> {
    let mut out = Vec::with_capacity(xs.len());
    let Some(&first) = xs.first() else {
        return Ok(out);
    };
    let mut y = y0;
    let mut k1 = system.rhs(first, &y)?;
    out.push(y);
    for w in xs.windows(2) {
        let (y_new, k7, _, _) = try_step(system, w[0], &y, &k1, w[1] - w[0])?;
        y = y_new;
        k1 = k7;
        out.push(y);
    }
    Ok(out)
}

type Trial<const N: usize> = ([f64; N], [f64; N], [f64; N], [[f64; N]; 5]);

fn try_step<const N: usize, S: System<N>>(system: &S, x: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Result<Trial<N>> {
    let k2 = system.rhs(x + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = system.rhs(x + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = system.rhs(x + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = system.rhs(
        x + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = system.rhs(
        x + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = system.rhs(x + h, &y_new)?;
    let err: [f64; N] =
        std::array::from_fn(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
    Ok((y_new, k7, err, [k2, k3, k4, k5, k6]))
}

/// Mixed max norm `max_i |e_i| / (abs_tol + rel_tol * max(|y_i|, |y_new_i|))`.
fn error_norm<const N: usize>(y: &[f64; N], y_new: &[f64; N], err: &[f64; N], config: &SolverConfig) -> f64 {
    (0..N)
        .map(|i| {
            let scale = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
            err[i].abs() / scale
        })
        .fold(0.0, f64::max)
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return f64::MIN_POSITIVE;
    }
    f64::from_bits(a.to_bits() + 1) - a
}
