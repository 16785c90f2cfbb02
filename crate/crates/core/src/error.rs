use thiserror::Error;

/// Errors raised by the library.
///
/// `Dimension`, `Precondition`, `Domain` and `InvalidArgument` all describe
/// bad input; the CLI maps them to exit status 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A named invariant of an input value does not hold.
    #[error("{}", precondition_message(invariant, detail))]
    Precondition { invariant: String, detail: String },

    /// A scalar function was applied to eigenvalues outside its domain.
    #[error("function undefined at eigenvalue(s) {eigenvalues:?}")]
    Domain { eigenvalues: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn precondition(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition {
            invariant: invariant.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}

fn precondition_message(invariant: &str, detail: &str) -> String {
    if detail.starts_with(invariant) {
        detail.to_string()
    } else {
        format!("{invariant}: {detail}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
