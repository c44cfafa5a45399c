use thiserror::Error;

/// Domain errors raised by the estimators, bounds, oracles and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("length mismatch: {values} values but {scales} scales")]
    LengthMismatch { values: usize, scales: usize },

    #[error("scale at index {index} must be finite and strictly positive, got {value}")]
    InvalidScale { index: usize, value: f64 },

    #[error("value at index {index} is not finite: {value}")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),

    #[error("trim index {j} must be smaller than n = {n}")]
    TrimIndex { j: usize, n: usize },

    #[error("{name} = {value} is out of range: expected {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}
