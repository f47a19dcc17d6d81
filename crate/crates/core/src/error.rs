use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid rate: {field} = {value} (must be finite and strictly positive)")]
    InvalidRate { field: &'static str, value: f64 },

    #[error("stability violation: {constraint} does not hold")]
    StabilityViolation { constraint: String },

    #[error("invalid parameter: {field} = {value} ({reason})")]
    InvalidParam {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("negative age {0}")]
    NegativeAge(f64),

    #[error("sample times are not strictly increasing at index {index}")]
    NonMonotoneTimes { index: usize },

    #[error("too few tasks after warm-up: got {got}, need at least {need}")]
    TooFewTasks { got: usize, need: usize },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("invalid device profile {device}: {reason}")]
    InvalidProfile { device: usize, reason: String },

    #[error("degenerate allocation: device {device} has a zero service rate")]
    DegenerateAllocation { device: usize },

    #[error("infeasible: no stable allocation exists for devices {devices:?}")]
    Infeasible { devices: Vec<usize> },
}

impl Error {
    pub(crate) fn unstable(constraint: impl Into<String>) -> Self {
        Error::StabilityViolation {
            constraint: constraint.into(),
        }
    }
}

pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidRate { field, value })
    }
}

pub(crate) fn non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidRate { field, value })
    }
}
