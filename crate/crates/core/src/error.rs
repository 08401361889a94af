use thiserror::Error;

pub type Result<T> = std::result::Result<T, PivError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PivError {
    /// An input value violates its domain constraint.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// The observed estimate is exactly zero, so there is no significant effect to defend.
    #[error("observed effect estimate is zero; direction of the significant effect is ambiguous")]
    AmbiguousDirection,

    /// A probability at 0 or 1 was asked to be mapped back to the real line.
    #[error("probability {0} is saturated; it has no finite probit")]
    Saturation(f64),

    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called on a result it does not apply to.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed CSV or JSON input.
    #[error("format error: {0}")]
    Format(String),
}

impl PivError {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        PivError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by degenerate math (saturation, zero estimate, non-finite kernel input).
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            PivError::AmbiguousDirection | PivError::Saturation(_) | PivError::Domain(_)
        )
    }
}
