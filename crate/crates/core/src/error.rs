use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("{function}: argument {value} outside domain ({reason})")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A model, policy or control parameter violates its invariant.
    #[error("{name} {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An iterative solver hit its iteration cap.
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    /// A series needed more terms than its control block allows.
    #[error("{series} series needs index {needed} beyond cap {cap}")]
    TruncationCap {
        series: &'static str,
        needed: usize,
        cap: usize,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::TruncationCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
