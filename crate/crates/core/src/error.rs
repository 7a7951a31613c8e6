use thiserror::Error;

/// Failures raised while parsing or evaluating a coefficient expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    /// `x` is `None` when the failure happened while folding an x-free expression.
    #[error("{}", eval_domain_message(.x, .message))]
    EvalDomain { x: Option<f64>, message: String },
}

fn eval_domain_message(x: &Option<f64>, message: &str) -> String {
    match x {
        Some(x) => format!("evaluation domain error at x={x}: {message}"),
        None => format!("evaluation domain error: {message}"),
    }
}

/// Errors produced by the solver toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PinneyError {
    #[error("c must be nonzero (c = 0 reduces to the linear equation)")]
    ZeroC,

    #[error("initial value q must be nonzero")]
    ZeroInitialValue,

    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("coefficient evaluation failed at x={x}: {source}")]
    CoefficientEvalFailed { x: f64, source: ExprError },

    #[error("step size collapsed to {step:e} at x={x}")]
    StepSizeCollapse { x: f64, step: f64 },

    #[error("x={x} is outside the covered interval [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("solution is singular or undefined at x={x} (discriminant {discriminant:e})")]
    SingularOrInvalid { x: f64, discriminant: f64 },

    #[error("method `{0}` is unavailable for this problem")]
    MethodUnavailable(&'static str),

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),
}

pub type Result<T, E = PinneyError> = std::result::Result<T, E>;
