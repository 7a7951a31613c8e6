//! Problem instances, solver settings and sample types shared by every solver path.

use std::fmt;

use serde::Serialize;

use crate::error::{PinneyError, Result};
use crate::expr::CoefficientSpec;

/// Sign of the square-root branch, fixed by the sign of the initial value `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn of(q: f64) -> Self {
        if q < 0.0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// `y'' + a(x) y + c / y^3 = 0` with `y(x0) = q`, `y'(x0) = p`.
///
/// Only constructed through [`validate_problem`], so `c != 0`, `q != 0` and every
/// numeric field is finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinneyProblem {
    coeff: CoefficientSpec,
    c: f64,
    x0: f64,
    q: f64,
    p: f64,
    branch: Branch,
}

impl PinneyProblem {
    pub fn coeff(&self) -> &CoefficientSpec {
        &self.coeff
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `Some(a0)` when the coefficient folded to a constant.
    pub fn constant_coefficient(&self) -> Option<f64> {
        self.coeff.as_constant()
    }
}

/// Checks the hypotheses of the problem and builds it.
pub fn validate_problem(coeff: CoefficientSpec, c: f64, x0: f64, q: f64, p: f64) -> Result<PinneyProblem> {
    for (name, value) in [("c", c), ("x0", x0), ("q", q), ("p", p)] {
        if !value.is_finite() {
            return Err(PinneyError::NonFinite(name));
        }
    }
    if let CoefficientSpec::Constant(a0) = coeff {
        if !a0.is_finite() {
            return Err(PinneyError::NonFinite("a0"));
        }
    }
    if c == 0.0 {
        return Err(PinneyError::ZeroC);
    }
    if q == 0.0 {
        return Err(PinneyError::ZeroInitialValue);
    }
    Ok(PinneyProblem {
        coeff,
        c,
        x0,
        q,
        p,
        branch: Branch::of(q),
    })
}

/// Positive constant solution `y*` of `a0 y + c / y^3 = 0`, if one exists.
pub fn equilibrium_solution(a0: f64, c: f64) -> Option<f64> {
    if a0 == 0.0 || !a0.is_finite() || !c.is_finite() {
        return None;
    }
    let ratio = -c / a0;
    (ratio > 0.0).then(|| ratio.sqrt().sqrt())
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    /// Direct integration stops once `|y|` drops below this.
    pub singularity_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.5,
            initial_step: 1e-3,
            singularity_floor: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("initial_step", self.initial_step),
            ("singularity_floor", self.singularity_floor),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(PinneyError::NonFinite(name));
            }
            if value <= 0.0 {
                return Err(PinneyError::InvalidArgument(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.rel_tol < 10.0 * f64::EPSILON {
            return Err(PinneyError::InvalidArgument(format!(
                "rel_tol must be at least {:e}, got {:e}",
                10.0 * f64::EPSILON,
                self.rel_tol
            )));
        }
        Ok(())
    }

    /// Same settings with both tolerances multiplied by `factor`.
    pub fn scaled_tolerances(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMethod {
    Superposition,
    ClosedForm,
    Direct,
}

impl fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMethod::Superposition => "superposition",
            SampleMethod::ClosedForm => "closed_form",
            SampleMethod::Direct => "direct",
        })
    }
}

/// A point `(x, y, y')` of a solution and the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionSample {
    pub x: f64,
    pub y: f64,
    pub dy: f64,
    pub method: SampleMethod,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn constant(a0: f64) -> CoefficientSpec {
        CoefficientSpec::Constant(a0)
    }

    #[test]
    fn rejects_zero_c() {
        assert_eq!(
            validate_problem(constant(1.0), 0.0, 0.0, 1.0, 0.0),
            Err(PinneyError::ZeroC)
        );
    }

    #[test]
    fn rejects_zero_q() {
        assert_eq!(
            validate_problem(constant(1.0), 1.0, 0.0, 0.0, 1.0),
            Err(PinneyError::ZeroInitialValue)
        );
    }

    #[test]
    fn accepts_valid_problem() {
        let p = validate_problem(constant(1.0), 1.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(p.branch(), Branch::Plus);
        assert_eq!(p.constant_coefficient(), Some(1.0));
        let n = validate_problem(constant(1.0), 1.0, 0.0, -2.0, 0.0).unwrap();
        assert_eq!(n.branch(), Branch::Minus);
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            validate_problem(constant(1.0), f64::NAN, 0.0, 1.0, 0.0),
            Err(PinneyError::NonFinite("c"))
        );
        assert_eq!(
            validate_problem(constant(1.0), 1.0, 0.0, 1.0, f64::INFINITY),
            Err(PinneyError::NonFinite("p"))
        );
        assert_eq!(
            validate_problem(constant(f64::NAN), 1.0, 0.0, 1.0, 0.0),
            Err(PinneyError::NonFinite("a0"))
        );
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(equilibrium_solution(-1.0, 1.0), Some(1.0));
        assert_eq!(equilibrium_solution(1.0, 1.0), None);
        assert_eq!(equilibrium_solution(-1.0, 16.0), Some(2.0));
        assert_eq!(equilibrium_solution(0.0, 1.0), None);
    }

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
        let bad = SolverConfig {
            rel_tol: 1e-17,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    fn magnitude() -> impl Strategy<Value = f64> {
        (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
    }

    proptest! {
        #[test]
        fn validate_is_total(a0 in any::<f64>(), c in any::<f64>(), x0 in any::<f64>(),
                             q in any::<f64>(), p in any::<f64>()) {
            let _ = validate_problem(constant(a0), c, x0, q, p);
        }

        #[test]
        fn equilibrium_balances_forces(a in magnitude(), c in magnitude(), flip in any::<bool>()) {
            let (a0, c) = if flip { (a, -c) } else { (-a, c) };
            let y = equilibrium_solution(a0, c).unwrap();
            prop_assert!((a0 * y + c / y.powi(3)).abs() < 1e-12);
        }
    }
}
