use thiserror::Error;

/// Errors raised by the dynamical and algebraic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("q must be at least 3, got {0}")]
    InvalidQ(u32),

    #[error("vector ({x}, {y}) cannot be classified into a sector: {reason}")]
    Classification { x: f64, y: f64, reason: &'static str },

    #[error("vector on the ray y = 0 is a fixed point of the continued fraction algorithm")]
    FixedPoint,

    #[error("point ({0}, {1}) lies outside the Farey triangle")]
    OutsideTriangle(f64, f64),

    #[error("point ({0}, {1}) lies outside the section set")]
    OutsideSection(f64, f64),

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("vector pair has dot product {0}, expected 1")]
    NotPaired(f64),

    #[error("branch {branch} does not contain a = {a}")]
    BranchMismatch { branch: usize, a: f64 },

    #[error("index {index} out of range for q = {q}")]
    IndexOutOfRange { index: usize, q: u32 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("enumeration bounds exhausted ({0}); increase bounds")]
    IncreaseBounds(&'static str),

    #[error("a = 1 is an indifferent fixed point; the acceleration count is undefined")]
    IndifferentFixedPoint,

    #[error("acceleration did not leave the parabolic branch within {0} steps")]
    AccelerationLimit(usize),

    #[error("division by zero in Q(lambda)")]
    DivisionByZero,
}

pub type Result<T> = std::result::Result<T, Error>;
