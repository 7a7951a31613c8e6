//! Analytic solutions for a constant coefficient `a(x) = a0`.
//!
//! Multiplying the equation by `y'` gives the first integral
//! `y'^2 + a0 y^2 - c / y^2 = E`, and with `z = y^2` the equation becomes the
//! forced linear oscillator `z'' + 4 a0 z = 2E`, `z(x0) = q^2`, `z'(x0) = 2pq`.

use serde::Serialize;

use crate::error::{PinneyError, Result};
use crate::linode::FundamentalPairState;
use crate::problem::{Branch, SampleMethod, SolutionSample};

/// Coefficients with `|a0|` below this are handled by the `a0 = 0` formulas.
pub const FLAT_THRESHOLD: f64 = 1e-13;

/// `E = p^2 + a0 q^2 - c / q^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyConstant(pub f64);

impl EnergyConstant {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn energy_constant(a0: f64, c: f64, q: f64, p: f64) -> EnergyConstant {
    EnergyConstant(p * p + a0 * q * q - c / (q * q))
}

/// Left side of the first integral at a point `(y, y')`.
pub fn energy_at(a0: f64, c: f64, y: f64, dy: f64) -> f64 {
    dy * dy + a0 * y * y - c / (y * y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `a0 > 0`
    Oscillatory,
    /// `a0 < 0`
    Hyperbolic,
    /// `a0 = 0`
    Flat,
}

impl Regime {
    pub fn of(a0: f64) -> Self {
        if a0.abs() < FLAT_THRESHOLD {
            Regime::Flat
        } else if a0 > 0.0 {
            Regime::Oscillatory
        } else {
            Regime::Hyperbolic
        }
    }
}

/// Closed-form `u`, `v` for constant `a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormPair {
    pub a0: f64,
    pub q: f64,
    pub p: f64,
    pub x0: f64,
}

pub fn closed_form_pair(a0: f64, q: f64, p: f64, x0: f64) -> ClosedFormPair {
    ClosedFormPair { a0, q, p, x0 }
}

impl ClosedFormPair {
    pub fn regime(&self) -> Regime {
        Regime::of(self.a0)
    }

    pub fn state_at(&self, x: f64) -> FundamentalPairState {
        let (q, p) = (self.q, self.p);
        let d = x - self.x0;
        let (u, du, v, dv) = match self.regime() {
            Regime::Flat => (q + p * d, p, d / q, 1.0 / q),
            Regime::Oscillatory => {
                let w = self.a0.sqrt();
                let (s, c) = (w * d).sin_cos();
                (q * c + p / w * s, -q * w * s + p * c, s / (q * w), c / q)
            }
            Regime::Hyperbolic => {
                let k = (-self.a0).sqrt();
                let (s, c) = ((k * d).sinh(), (k * d).cosh());
                (q * c + p / k * s, q * k * s + p * c, s / (q * k), c / q)
            }
        };
        FundamentalPairState { x, u, du, v, dv }
    }
}

/// `z(x) = y(x)^2` in closed form.
///
/// For `a0 != 0`: `z = mean + cos_amp * C(2 th) + sin_amp * S(2 th)` with `th = w (x - x0)`,
/// where `(C, S)` is `(cos, sin)` when `a0 > 0` and `(cosh, sinh)` when `a0 < 0`,
/// `w = sqrt(|a0|)`. For `a0 = 0` the coefficients are those of the quadratic
/// `z0 + z1 (x - x0) + z2 (x - x0)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZClosedForm {
    pub a0: f64,
    pub energy: f64,
    pub x0: f64,
    pub regime: Regime,
    pub coefficients: ZCoefficients,
    q: f64,
    p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ZCoefficients {
    Harmonic { mean: f64, cos_amp: f64, sin_amp: f64 },
    Polynomial { z0: f64, z1: f64, z2: f64 },
}

pub fn z_closed_form(a0: f64, c: f64, q: f64, p: f64, x0: f64) -> ZClosedForm {
    let energy = energy_constant(a0, c, q, p).value();
    let regime = Regime::of(a0);
    let coefficients = match regime {
        Regime::Flat => ZCoefficients::Polynomial {
            z0: q * q,
            z1: 2.0 * p * q,
            z2: energy,
        },
        Regime::Oscillatory | Regime::Hyperbolic => {
            let mean = energy / (2.0 * a0);
            ZCoefficients::Harmonic {
                mean,
                cos_amp: q * q - mean,
                sin_amp: p * q / a0.abs().sqrt(),
            }
        }
    };
    ZClosedForm {
        a0,
        energy,
        x0,
        regime,
        coefficients,
        q,
        p,
    }
}

impl ZClosedForm {
    /// `(z, z', z'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (z, dz, ddz, _) = self.eval_with_bound(x);
        (z, dz, ddz)
    }

    /// `(z, z', z'', bound)` where `bound` estimates the rounding error of `z`.
    fn eval_with_bound(&self, x: f64) -> (f64, f64, f64, f64) {
        let d = x - self.x0;
        let (q2, pq) = (self.q * self.q, self.p * self.q);
        let eps = f64::EPSILON;
        match self.coefficients {
            ZCoefficients::Polynomial { z0, z1, z2 } => {
                let z = z0 + d * (z1 + z2 * d);
                let bound = 4.0 * eps * (z0.abs() + (z1 * d).abs() + (z2 * d * d).abs());
                (z, z1 + 2.0 * z2 * d, 2.0 * z2, bound)
            }
            ZCoefficients::Harmonic {
                mean: _,
                cos_amp,
                sin_amp,
            } => {
                let w = self.a0.abs().sqrt();
                let th = w * d;
                // z = q^2 + cos_amp (C(2th) - 1) + sin_amp S(2th), with C(2th) - 1 written as
                // -2 sin^2(th) or 2 sinh^2(th): exact at x0, and no large cancelling terms
                // when the growing and decaying modes are absent.
                let (z, dz, ddz, terms) = if self.regime == Regime::Oscillatory {
                    let (s2, c2) = (2.0 * th).sin_cos();
                    let half = th.sin();
                    let parts = [q2, -2.0 * cos_amp * half * half, sin_amp * s2];
                    let dz = -2.0 * w * cos_amp * s2 + 2.0 * pq * c2;
                    let ddz = -4.0 * self.a0 * (cos_amp * c2 + sin_amp * s2);
                    (parts.iter().sum::<f64>(), dz, ddz, parts)
                } else {
                    let (s2, c2) = ((2.0 * th).sinh(), (2.0 * th).cosh());
                    let half = th.sinh();
                    let parts = [q2, 2.0 * cos_amp * half * half, sin_amp * s2];
                    let dz = 2.0 * w * cos_amp * s2 + 2.0 * pq * c2;
                    let ddz = -4.0 * self.a0 * (cos_amp * c2 + sin_amp * s2);
                    (parts.iter().sum::<f64>(), dz, ddz, parts)
                };
                // term rounding plus the phase error of `th`, which moves z by about z' * dx
                let bound = 4.0 * eps * terms.iter().map(|t| t.abs()).sum::<f64>() + 4.0 * eps * (dz * d).abs();
                (z, dz, ddz, bound)
            }
        }
    }

    pub fn z(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// `z(x)` is positive by more than its own rounding error.
    pub fn is_regular_at(&self, x: f64) -> bool {
        let (z, _, _, bound) = self.eval_with_bound(x);
        z > bound
    }
}

/// `y = ±sqrt(z)`, `y' = z' / (2y)`.
///
/// Values of `z` that cannot be told apart from zero at double precision count
/// as singular.
pub fn y_from_z(zf: &ZClosedForm, branch: Branch, x: f64) -> Result<SolutionSample> {
    let (z, dz, _, bound) = zf.eval_with_bound(x);
    if z.is_nan() || z <= bound {
        return Err(PinneyError::SingularOrInvalid { x, discriminant: z });
    }
    let y = branch.sign() * z.sqrt();
    Ok(SolutionSample {
        x,
        y,
        dy: dz / (2.0 * y),
        method: SampleMethod::ClosedForm,
    })
}

/// Largest `|u^2 - c v^2 - z|` over `xs`, using the closed-form pair and `z`.
pub fn pair_z_consistency(a0: f64, c: f64, q: f64, p: f64, x0: f64, xs: &[f64]) -> f64 {
    let pair = closed_form_pair(a0, q, p, x0);
    let zf = z_closed_form(a0, c, q, p, x0);
    xs.iter()
        .map(|&x| {
            let s = pair.state_at(x);
            (s.u * s.u - c * s.v * s.v - zf.z(x)).abs()
        })
        .fold(0.0, f64::max)
}
