use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error in `{field}`: {message}")]
    Domain { field: &'static str, message: String },

    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t:e}")]
    StepBudget { t: f64, max_steps: usize },

    #[error("invariant `{metric}` violated at t = {t:e}: {value:e}")]
    Invariant { metric: &'static str, value: f64, t: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no usable result: {0}")]
    Empty(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. } | Error::StepBudget { .. } | Error::Invariant { .. } | Error::Empty(_)
        )
    }

    pub(crate) fn domain(field: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { field, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
