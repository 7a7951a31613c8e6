//! Singular points for `c > 0`.
//!
//! The discriminant factors as `u^2 - c v^2 = (u - sqrt(c) v)(u + sqrt(c) v)`. Each
//! factor is itself a solution of the linear equation, so its zeros are simple;
//! they are bracketed by sign changes on a scan grid and refined by bisection.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constcoeff::{ClosedFormPair, Regime};
use crate::error::Result;
use crate::linode::{integrate_pair_over, DensePairSolution, FundamentalPairState};
use crate::problem::{PinneyProblem, SolverConfig};

/// Scan points per accepted integrator step.
const POINTS_PER_STEP: usize = 8;

/// Anything that can report the fundamental pair at a point.
pub trait PairSource {
    fn state(&self, x: f64) -> Result<FundamentalPairState>;

    /// Increasing grid on `[lo, hi]` fine enough that no factor has two zeros
    /// between neighbouring points.
    fn scan_grid(&self, lo: f64, hi: f64) -> Vec<f64>;
}

impl PairSource for DensePairSolution {
    fn state(&self, x: f64) -> Result<FundamentalPairState> {
        self.eval(x)
    }

    fn scan_grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut grid = vec![lo];
        for (a, b) in self.step_intervals() {
            if b <= lo || a >= hi {
                continue;
            }
            for k in 1..=POINTS_PER_STEP {
                let t = a + (b - a) * k as f64 / POINTS_PER_STEP as f64;
                if t > lo && t < hi {
                    grid.push(t);
                }
            }
        }
        grid.push(hi);
        grid
    }
}

impl PairSource for ClosedFormPair {
    fn state(&self, x: f64) -> Result<FundamentalPairState> {
        Ok(self.state_at(x))
    }

    fn scan_grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let width = hi - lo;
        // Zeros of an oscillatory factor are pi / sqrt(a0) apart.
        let spacing = match self.regime() {
            Regime::Oscillatory => (PI / self.a0.sqrt() / 16.0).min(width / 64.0),
            Regime::Flat | Regime::Hyperbolic => width / 64.0,
        };
        let n = ((width / spacing).ceil() as usize).max(1);
        (0..=n)
            .map(|i| if i == n { hi } else { lo + width * i as f64 / n as f64 })
            .collect()
    }
}

/// Which linear factor of the discriminant vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    /// `u - sqrt(c) v`
    Minus,
    /// `u + sqrt(c) v`
    Plus,
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::Minus => "minus",
            Factor::Plus => "plus",
        }
    }

    /// `(w, w')` for this factor.
    pub fn eval(self, state: &FundamentalPairState, sqrt_c: f64) -> (f64, f64) {
        match self {
            Factor::Minus => (state.u - sqrt_c * state.v, state.du - sqrt_c * state.dv),
            Factor::Plus => (state.u + sqrt_c * state.v, state.du + sqrt_c * state.dv),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularPoint {
    pub x: f64,
    pub factor: Factor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityReport {
    /// Strictly increasing in x.
    pub points: Vec<SingularPoint>,
    pub search: (f64, f64),
    /// Open interval around `x0` free of singular points, clipped to the search interval.
    pub domain: (f64, f64),
    /// `c < 0`: nothing to search for.
    pub not_applicable: bool,
}

impl SingularityReport {
    fn empty(x_lo: f64, x_hi: f64, not_applicable: bool) -> Self {
        Self {
            points: Vec::new(),
            search: (x_lo, x_hi),
            domain: (x_lo, x_hi),
            not_applicable,
        }
    }

    /// Singular point bounding the domain of validity below `x0`, if any.
    pub fn lower(&self) -> Option<f64> {
        self.points.iter().map(|p| p.x).rev().find(|&x| x == self.domain.0)
    }

    /// Singular point bounding the domain of validity above `x0`, if any.
    pub fn upper(&self) -> Option<f64> {
        self.points.iter().map(|p| p.x).find(|&x| x == self.domain.1)
    }
}

/// Integrates the pair over `[x_lo, x_hi]` and locates every zero of both factors.
pub fn find_singularities(
    problem: &PinneyProblem,
    x_lo: f64,
    x_hi: f64,
    config: &SolverConfig,
    refine_tol: f64,
) -> Result<SingularityReport> {
    if problem.c() < 0.0 {
        return Ok(SingularityReport::empty(x_lo, x_hi, true));
    }
    let sol = integrate_pair_over(problem, x_lo, x_hi, config)?;
    locate(&sol, problem.c(), problem.x0(), x_lo, x_hi, refine_tol)
}

/// Same search on any pair source, e.g. the closed-form pair.
pub fn locate<S: PairSource>(
    source: &S,
    c: f64,
    x0: f64,
    x_lo: f64,
    x_hi: f64,
    refine_tol: f64,
) -> Result<SingularityReport> {
    if c < 0.0 {
        return Ok(SingularityReport::empty(x_lo, x_hi, true));
    }
    let sqrt_c = c.sqrt();
    let grid = source.scan_grid(x_lo, x_hi);
    let states = grid.iter().map(|&x| source.state(x)).collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    for factor in [Factor::Minus, Factor::Plus] {
        let w = |s: &FundamentalPairState| factor.eval(s, sqrt_c).0;
        for (i, pair) in states.windows(2).enumerate() {
            let (wa, wb) = (w(&pair[0]), w(&pair[1]));
            if wa == 0.0 {
                points.push(SingularPoint { x: grid[i], factor });
            } else if wa * wb < 0.0 {
                let x = bisect(source, factor, sqrt_c, grid[i], grid[i + 1], wa, refine_tol)?;
                points.push(SingularPoint { x, factor });
            }
        }
        if let Some(last) = states.last() {
            if w(last) == 0.0 {
                points.push(SingularPoint {
                    x: *grid.last().unwrap(),
                    factor,
                });
            }
        }
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    points.dedup_by(|b, a| a.x == b.x);

    let lower = points.iter().map(|p| p.x).rev().find(|&x| x < x0);
    let upper = points.iter().map(|p| p.x).find(|&x| x > x0);
    Ok(SingularityReport {
        points,
        search: (x_lo, x_hi),
        domain: (lower.unwrap_or(x_lo), upper.unwrap_or(x_hi)),
        not_applicable: false,
    })
}

/// Bisection to a bracket no wider than `tol`, finished with one secant step
/// inside the final bracket.
fn bisect<S: PairSource>(
    source: &S,
    factor: Factor,
    sqrt_c: f64,
    mut a: f64,
    mut b: f64,
    mut wa: f64,
    tol: f64,
) -> Result<f64> {
    let w = |x: f64| -> Result<f64> { Ok(factor.eval(&source.state(x)?, sqrt_c).0) };
    let mut wb = w(b)?;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let wm = w(mid)?;
        if wm == 0.0 {
            return Ok(mid);
        }
        if wa * wm < 0.0 {
            b = mid;
            wb = wm;
        } else {
            a = mid;
            wa = wm;
        }
    }
    let secant = a - wa * (b - a) / (wb - wa);
    Ok(if secant.is_finite() {
        secant.clamp(a, b)
    } else {
        0.5 * (a + b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constcoeff::closed_form_pair;
    use crate::expr::CoefficientSpec;
    use crate::problem::validate_problem;
    use std::f64::consts::FRAC_PI_4;

    fn problem(a0: f64, c: f64, q: f64, p: f64) -> PinneyProblem {
        validate_problem(CoefficientSpec::Constant(a0), c, 0.0, q, p).unwrap()
    }

    #[test]
    fn harmonic_singularities() {
        let cfg = SolverConfig::default();
        let report = find_singularities(&problem(1.0, 1.0, 1.0, 0.0), 0.0, 2.5, &cfg, 1e-10).unwrap();
        assert_eq!(report.points.len(), 2);
        assert_eq!(report.points[0].factor, Factor::Minus);
        assert_eq!(report.points[1].factor, Factor::Plus);
        assert!((report.points[0].x - FRAC_PI_4).abs() < 1e-9);
        assert!((report.points[1].x - 3.0 * FRAC_PI_4).abs() < 1e-9);
        assert_eq!(report.domain.0, 0.0);
        assert_eq!(report.domain.1, report.points[0].x);
        assert_eq!(report.upper(), Some(report.points[0].x));
        assert_eq!(report.lower(), None);
    }

    #[test]
    fn flat_singularities() {
        let cfg = SolverConfig::default();
        let report = find_singularities(&problem(0.0, 1.0, 1.0, 0.0), -2.0, 2.0, &cfg, 1e-10).unwrap();
        let got: Vec<_> = report.points.iter().map(|p| (p.x, p.factor)).collect();
        assert_eq!(got.len(), 2);
        assert!((got[0].0 + 1.0).abs() < 1e-12 && got[0].1 == Factor::Plus);
        assert!((got[1].0 - 1.0).abs() < 1e-12 && got[1].1 == Factor::Minus);
        assert_eq!(report.domain, (got[0].0, got[1].0));
    }

    #[test]
    fn negative_c_is_not_applicable() {
        let cfg = SolverConfig::default();
        let report = find_singularities(&problem(1.0, -1.0, 1.0, 0.0), -5.0, 5.0, &cfg, 1e-10).unwrap();
        assert!(report.not_applicable);
        assert!(report.points.is_empty());
        assert_eq!(report.domain, (-5.0, 5.0));
    }

    #[test]
    fn closed_form_source_agrees() {
        let pair = closed_form_pair(1.0, 1.0, 0.0, 0.0);
        let report = locate(&pair, 1.0, 0.0, -4.0, 4.0, 1e-12).unwrap();
        let want = [-5.0, -3.0, -1.0, 1.0, 3.0, 5.0].map(|k| k * FRAC_PI_4);
        assert_eq!(report.points.len(), 6);
        for (p, w) in report.points.iter().zip(want) {
            assert!((p.x - w).abs() < 1e-12, "{} vs {w}", p.x);
        }
        assert!((report.domain.0 + FRAC_PI_4).abs() < 1e-12);
        assert!((report.domain.1 - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn refined_points_are_zeros_with_nonzero_slope() {
        let cfg = SolverConfig::default();
        let tol = 1e-10;
        for (a0, q, p) in [(1.0, 1.0, 0.0), (1.0, 1.0, 1.0), (4.0, -0.5, 2.0), (0.0, 1.0, 0.0)] {
            let prob = problem(a0, 1.0, q, p);
            let sol = integrate_pair_over(&prob, -6.0, 6.0, &cfg).unwrap();
            let report = locate(&sol, 1.0, 0.0, -6.0, 6.0, tol).unwrap();
            for pt in &report.points {
                let (w, dw) = pt.factor.eval(&sol.eval(pt.x).unwrap(), 1.0);
                assert!(w.abs() < 10.0 * tol * dw.abs().max(1.0), "a0={a0} x={}", pt.x);
                assert!(dw.abs() > 1e-6);
            }
            for w in report.points.windows(2) {
                assert!(w[0].x < w[1].x);
            }
        }
    }
}
