use std::fmt;

use thiserror::Error;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Mesh,
    Measure,
    Solve,
    Terms,
    FiniteDifference,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Mesh => "mesh",
            Stage::Measure => "measure",
            Stage::Solve => "solve",
            Stage::Terms => "terms",
            Stage::FiniteDifference => "finite-difference",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid resolution: {0}")]
    InvalidResolution(String),

    #[error("point {point:?} is not on the boundary (distance {distance:e})")]
    NotOnBoundary { point: [f64; 2], distance: f64 },

    #[error("vector is not tangent to the boundary (normal component {normal_component:e})")]
    NotTangent { normal_component: f64 },

    #[error("(t={t}, x={x:?}) lies outside the validity box of `{field}`")]
    OutsideValidityBox { field: String, t: f64, x: [f64; 2] },

    #[error("field is not positive at (t={t}, x={x:?}): value {value}")]
    NonPositiveField { t: f64, x: [f64; 2], value: f64 },

    #[error("non-finite density weight at (t={t}, x={x:?})")]
    NonFiniteWeight { t: f64, x: [f64; 2] },

    #[error("beta must differ from the dimension n = {n}")]
    BetaEqualsDimension { n: usize },

    #[error("beta must be nonzero for this evaluator")]
    BetaZero,

    #[error("length mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("right-hand side violates the compatibility condition: mean {mean:e}")]
    IncompatibleRhs { mean: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("resolution too small for the derivative stencil: {nodes} nodes, need at least {required}")]
    UnderResolved { nodes: usize, required: usize },

    #[error("Neumann condition residual {residual:e} exceeds {threshold:e}")]
    BoundaryResidual { residual: f64, threshold: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("positive-part clamp triggered at beta = {beta}: integrand base {base} <= 0")]
    PositivePartClamp { beta: f64, base: f64 },

    #[error("{stage} stage failed at t = {t}: {source}")]
    Staged {
        stage: Stage,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attributes the error to `stage` at time `t`, unless already attributed.
    pub fn at(self, stage: Stage, t: f64) -> Error {
        match self {
            staged @ Error::Staged { .. } => staged,
            other => Error::Staged {
                stage,
                t,
                source: Box::new(other),
            },
        }
    }

    /// Innermost error, with stage attribution stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Staged { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
