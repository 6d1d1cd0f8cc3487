use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown component `{0}`")]
    UnknownComponent(String),

    #[error("boundary coefficient of `{component}` is {coefficient}, outside [0,1]")]
    InvalidBoundary {
        component: String,
        coefficient: Rational,
    },

    #[error("`{component}` has negative coefficient {coefficient} in a divisor required to be effective")]
    NegativeCoefficient {
        component: String,
        coefficient: Rational,
    },

    #[error("no component of N outside the reduced boundary has positive coefficient (theta is zero)")]
    NoThreshold,

    #[error("theta is {0}; the loop requires theta = 0")]
    ThetaPositive(usize),

    #[error("intersection matrix on {{{}}} is not negative definite", .support.join(", "))]
    NotNegativeDefinite { support: Vec<String> },

    #[error("divisor is not pseudo-effective: {0}")]
    NotPseudoEffective(String),

    #[error("nef certificate failed: {divisor} has intersection {value} with `{witness}`")]
    NotNef {
        divisor: String,
        witness: String,
        value: Rational,
    },

    #[error("invalid fan: {0}")]
    InvalidFan(String),

    #[error("fan surgery produced a non-fan: cones {first:?} and {second:?} {detail}")]
    NonFan {
        first: Vec<usize>,
        second: Vec<usize>,
        detail: String,
    },

    #[error("operation requires a complete fan")]
    NotComplete,

    #[error("wall {0:?} is not a wall of the fan")]
    UnknownWall(Vec<usize>),

    #[error("vector {0:?} is outside the support of the fan")]
    OutsideSupport(Vec<i64>),

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configured bound exceeded: {0}")]
    BoundExceeded(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::UnknownComponent(_) => "unknown_component",
            Error::InvalidBoundary { .. } => "invalid_boundary",
            Error::NegativeCoefficient { .. } => "negative_coefficient",
            Error::NoThreshold => "no_threshold",
            Error::ThetaPositive(_) => "theta_positive",
            Error::NotNegativeDefinite { .. } => "not_negative_definite",
            Error::NotPseudoEffective(_) => "not_pseudo_effective",
            Error::NotNef { .. } => "not_nef",
            Error::InvalidFan(_) => "invalid_fan",
            Error::NonFan { .. } => "non_fan",
            Error::NotComplete => "not_complete",
            Error::UnknownWall(_) => "unknown_wall",
            Error::OutsideSupport(_) => "outside_support",
            Error::Unbounded => "unbounded",
            Error::ModelMismatch(_) => "model_mismatch",
            Error::Precondition(_) => "precondition",
            Error::BoundExceeded(_) => "bound_exceeded",
            Error::Invariant(_) => "invariant",
        }
    }
}
