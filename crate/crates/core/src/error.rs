use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural parameter (buyer count, grid size, ...) is unusable.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input data violates a distribution or instance invariant.
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    /// Exact enumeration would exceed the configured profile cap.
    #[error("capacity error: joint support has {profiles} profiles, cap is {cap}")]
    Capacity { profiles: u128, cap: u64 },

    /// The operation needs a finite discrete representation.
    #[error("unsupported representation: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Prefix the field path of a validation error, e.g. `support[1]` to
    /// `buyers[0].support[1]`.
    pub fn nest(self, prefix: &str) -> Self {
        match self {
            Error::Validation { path, message } => {
                let path = if path.is_empty() {
                    prefix.to_string()
                } else if path.starts_with('[') {
                    format!("{prefix}{path}")
                } else {
                    format!("{prefix}.{path}")
                };
                Error::Validation { path, message }
            }
            other => other,
        }
    }
}
