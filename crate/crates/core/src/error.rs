use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("coordinate {x} lies outside the field domain ({lo}, {hi})")]
    DomainViolation { x: f64, lo: f64, hi: f64 },

    #[error("missing closed-form derivative of order {order} for {what}")]
    MissingDerivative { what: String, order: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("velocity profile is not strictly positive: v_f({x}) = {value}")]
    NonPositiveVelocity { x: f64, value: f64 },

    #[error("mass function is not strictly positive at x = {x} (M = {value})")]
    NonPositiveMass { x: f64, value: f64 },

    #[error("ambiguity parameters violate eta + beta + gamma = -1 (sum = {sum})")]
    AmbiguityConstraint { sum: f64 },

    #[error("non-finite potential value {value} at coordinate {x}")]
    NonFinitePotential { x: f64, value: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}]")]
    QuadratureFailure { lo: f64, hi: f64 },

    #[error("coordinate map cannot be inverted at y = {y}")]
    InversionFailure { y: f64 },

    #[error("coordinate {y} is outside the sampled range [{lo}, {hi}]; extrapolation refused")]
    Extrapolation { y: f64, lo: f64, hi: f64 },

    #[error("hypergeometric series: {0}")]
    Hypergeometric(String),

    #[error("eigensolver: {0}")]
    Eigensolver(String),

    #[error("inverse iteration stagnated for eigenvalue index {index} (residual {residual:e})")]
    InverseIterationStagnation { index: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
