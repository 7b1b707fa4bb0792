use thiserror::Error;

/// Errors produced by validation and the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("unstable normal mode: {0}")]
    Unstable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("failed to parse config: {0}")]
    Parse(String),

    #[error("trajectory left the bounded region at t = {t}")]
    Escaped { t: f64 },

    #[error("seed ({q2}, {p2}) lies outside the energy shell E = {energy}")]
    OffShell { q2: f64, p2: f64, energy: f64 },

    #[error("uncertainty relation violated: det = {det:e} < (hbar/2)^2 = {bound:e}")]
    Uncertainty { det: f64, bound: f64 },

    #[error("global state is not pure (purity {purity})")]
    Impure { purity: f64 },

    #[error("coherent-state truncation loss {loss:e} too large; need n_max >= {required}")]
    Truncation { loss: f64, required: usize },

    #[error("convergence check failed: {0}")]
    Convergence(String),
}

impl Error {
    /// True for errors caused by the user-supplied configuration.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Unstable(_)
                | Error::Unsupported(_)
                | Error::Parse(_)
                | Error::OffShell { .. }
                | Error::Truncation { .. }
        )
    }

    /// True for errors raised by a numerical self-check.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::Escaped { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
