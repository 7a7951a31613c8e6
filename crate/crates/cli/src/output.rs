use std::io::{self, Write};

use pinney_core::{PinneyProblem, SolveOutput, SolvedPoint};
use serde::Serialize;
use serde_json::{json, Value};

pub const CSV_HEADER: &str = "x,y,dy,u,v,discriminant,residual";

/// Shortest representation that parses back to the same double; plain decimal in
/// the everyday range, exponent form outside it.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn csv_row(p: &SolvedPoint) -> String {
    let s = &p.sample;
    format!(
        "{},{},{},{},{},{},{}",
        num(s.x),
        num(s.y),
        num(s.dy),
        opt(p.u),
        opt(p.v),
        opt(p.discriminant),
        opt(p.residual)
    )
}

pub fn write_solve_csv(out: &mut dyn Write, solved: &SolveOutput) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in &solved.points {
        writeln!(out, "{}", csv_row(p))?;
    }
    for x in solved.truncated_at() {
        writeln!(out, "# truncated at x={} (singularity)", num(x))?;
    }
    Ok(())
}

pub fn problem_json(problem: &PinneyProblem) -> Value {
    json!({
        "a": problem.coeff().to_string(),
        "c": problem.c(),
        "x0": problem.x0(),
        "q": problem.q(),
        "p": problem.p(),
    })
}

#[derive(Serialize)]
struct JsonSample {
    x: f64,
    y: f64,
    dy: f64,
    u: Option<f64>,
    v: Option<f64>,
    discriminant: Option<f64>,
    residual: Option<f64>,
}

impl From<&SolvedPoint> for JsonSample {
    fn from(p: &SolvedPoint) -> Self {
        Self {
            x: p.sample.x,
            y: p.sample.y,
            dy: p.sample.dy,
            u: p.u,
            v: p.v,
            discriminant: p.discriminant,
            residual: p.residual,
        }
    }
}

/// Every command that emits JSON uses this envelope.
pub fn envelope(problem: &PinneyProblem, samples: &[SolvedPoint], truncated_at: &[f64], diagnostics: Value) -> Value {
    let samples: Vec<JsonSample> = samples.iter().map(JsonSample::from).collect();
    let mut doc = json!({
        "problem": problem_json(problem),
        "samples": samples,
        "diagnostics": diagnostics,
    });
    if !truncated_at.is_empty() {
        doc["truncated_at"] = json!(truncated_at);
    }
    doc
}

pub fn write_solve_json(out: &mut dyn Write, problem: &PinneyProblem, solved: &SolveOutput) -> io::Result<()> {
    let max_residual = solved
        .points
        .iter()
        .filter_map(|p| p.residual)
        .map(f64::abs)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let diagnostics = json!({
        "method": solved.method,
        "samples": solved.points.len(),
        "max_abs_residual": max_residual,
        "low_confidence": solved.points.iter().filter(|p| p.low_confidence).count(),
        "singular_points": solved.singularities.as_ref().map(|r| &r.points),
    });
    let doc = envelope(problem, &solved.points, &solved.truncated_at(), diagnostics);
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}
