//! Crate-wide error type.
//!
//! Refutations are not errors: a failed inequality comes back as a
//! [`crate::report::CertReport`] with `Refuted` status. `Error` covers the
//! cases where a check cannot produce a verdict at all, such as an expression
//! failing to evaluate at a concrete sample or a malformed problem input.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),

    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),

    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error(
        "evaluation failed at sample s={s:?}, t={t:?}, alpha={alpha}, lambda={lambda}: {source}"
    )]
    SampleEval {
        s: Vec<f64>,
        t: Vec<f64>,
        alpha: f64,
        lambda: f64,
        source: crate::expr::EvalError,
    },

    #[error("finite-difference stencil leaves the box on both sides of axis {axis} at {point:?}")]
    GradientStencil { axis: usize, point: Vec<f64> },

    #[error("analytic gradient `{name}` returned {got} components, expected {expected}")]
    GradientShape {
        name: String,
        got: usize,
        expected: usize,
    },

    #[error("cannot recover v with E(v) = {target:?}: {reason}")]
    VbarRecovery { target: Vec<f64>, reason: String },

    #[error("the sampling plan is invalid: {0}")]
    InvalidPlan(String),

    #[error("the sampled feasible set is empty")]
    EmptyFeasibleSet,

    #[error("start point {0:?} is infeasible")]
    InfeasibleStart(Vec<f64>),

    #[error("no feasible start point found in the box")]
    NoFeasibleStart,

    #[error("problem file: {0}")]
    ProblemFile(String),

    #[error("{0}")]
    Usage(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn sample_eval(
        s: &[f64],
        t: &[f64],
        alpha: f64,
        lambda: f64,
        source: crate::expr::EvalError,
    ) -> Error {
        Error::SampleEval {
            s: s.to_vec(),
            t: t.to_vec(),
            alpha,
            lambda,
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
