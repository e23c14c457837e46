use std::fmt;

use thiserror::Error;

use crate::polyhedral::ApproxResult;

/// Named standing assumptions of the two approximation algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assumption {
    /// The spectrahedron is line-free (its recession cone is pointed).
    C1,
    /// Some `x̄` has a positive definite homogeneous pencil `A(x̄) ≻ 0`.
    C2,
    /// The shadow is closed and is not the whole space.
    S1,
    /// A strictly feasible `(x̄, ȳ)` is known.
    S2,
    /// An interior recession direction `d̄` inside the unit ball is known.
    S3,
}

impl Assumption {
    pub fn code(self) -> &'static str {
        match self {
            Assumption::C1 => "C1",
            Assumption::C2 => "C2",
            Assumption::S1 => "S1",
            Assumption::S2 => "S2",
            Assumption::S3 => "S3",
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("polyhedron is unbounded")]
    UnboundedPolyhedron,

    #[error("polyhedron is empty")]
    EmptyPolyhedron,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("assumption {assumption} violated: {detail}")]
    AssumptionViolation {
        assumption: Assumption,
        detail: String,
    },

    #[error("algorithm failure: {0}")]
    AlgorithmFailure(String),

    #[error("iteration limit of {limit} reached")]
    Timeout {
        limit: usize,
        partial: Box<ApproxResult>,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("sampling exhausted after {attempts} attempts ({accepted} accepted)")]
    SamplingExhausted { attempts: usize, accepted: usize },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn assumption(assumption: Assumption, detail: impl Into<String>) -> Self {
        Error::AssumptionViolation {
            assumption,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
