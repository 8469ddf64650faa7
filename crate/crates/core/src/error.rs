use thiserror::Error;

use crate::fieldexpr::{EvalError, ParseError};

/// Errors raised by graph construction, the solvers and the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cell budget exceeded: level {level} of the {dim}-simplex gasket needs {cells} cells, budget is {budget}")]
    CellBudget {
        dim: usize,
        level: u32,
        cells: u128,
        budget: u64,
    },

    #[error("enumeration budget exceeded: {0}")]
    EnumerationBudget(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("right-hand side must be strictly positive: f = {value} at {point:?}")]
    NonPositive { value: f64, point: Vec<f64> },

    #[error("boundary set is empty")]
    EmptyBoundary,

    #[error("vertex {0} cannot reach the boundary set")]
    Unreachable(usize),

    #[error("unknown vertex: {0}")]
    UnknownVertex(String),

    #[error("boundary data incompatible: g({worse}) exceeds path cost to {better} plus g({better}) by {violation:e}")]
    Incompatible {
        worse: String,
        better: String,
        violation: f64,
    },

    #[error("value iteration did not converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} with {panels} panels (last change {change:e})")]
    Quadrature {
        tolerance: f64,
        panels: usize,
        change: f64,
    },

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
