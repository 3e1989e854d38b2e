use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its physical or mathematical domain.
    #[error("invalid {name}: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("mode index {index} out of range for a {n_modes}-mode state")]
    InvalidMode { index: usize, n_modes: usize },

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("{what} did not converge after {iterations} iterations (last change {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),

    #[error("topology error: {0}")]
    Topology(String),

    /// Configuration value rejected during validation; `path` is the dotted key path.
    #[error("{path}: {message}")]
    Config { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by a numerical method failing rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
