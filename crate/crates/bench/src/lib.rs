//! Fixed problems shared by the benchmarks.

use pinney_core::{parse_coefficient, validate_problem, PinneyProblem};

pub struct Fixture {
    pub name: &'static str,
    pub problem: PinneyProblem,
    pub range: (f64, f64),
}

fn fixture(name: &'static str, a: &str, c: f64, q: f64, p: f64, range: (f64, f64)) -> Fixture {
    let problem =
        validate_problem(parse_coefficient(a).expect("fixture coefficient"), c, 0.0, q, p).expect("fixture problem");
    Fixture { name, problem, range }
}

/// One constant-coefficient case, one expression case, one with singular points.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        fixture("harmonic_c_neg", "1", -1.0, 1.0, 0.0, (-10.0, 10.0)),
        fixture("modulated", "1+0.5*sin(x)", -1.0, 1.0, 0.0, (0.0, 20.0)),
        fixture("harmonic_singular", "1", 1.0, 1.0, 1.0, (-5.0, 5.0)),
    ]
}
