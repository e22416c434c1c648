use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or series computation did not reach its tolerance.
    /// `estimate` is the best value reached.
    #[error("convergence failure in {context}: {detail} (last estimate {estimate:.6e})")]
    Convergence {
        context: &'static str,
        detail: String,
        estimate: f64,
    },

    /// A configured budget (horizon cap, memory budget) would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn convergence(context: &'static str, detail: impl Into<String>, estimate: f64) -> Self {
        Error::Convergence {
            context,
            detail: detail.into(),
            estimate,
        }
    }
}
