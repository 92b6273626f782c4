use thiserror::Error;

/// Errors raised across the library.
///
/// The CLI maps [`Error::is_usage`] variants to exit code 2 and everything
/// else to exit code 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported exponent p = {0} (only 1 and 2 are supported)")]
    UnsupportedExponent(u32),

    #[error("quadrature failed to converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("infeasible sparsity: {active} active blocks requested but only {available} exist")]
    InfeasibleSparsity { active: usize, available: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),

    #[error("unsupported block size {0}: rule requires B >= 3")]
    UnsupportedBlockSize(usize),

    #[error("AMP diverged at iteration {iteration}")]
    Divergence { iteration: usize, sigma_history: Vec<f64> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("transition fit failed: {0}")]
    Fit(String),

    #[error("unknown shrinkage rule '{0}' (expected soft, bayes-gstar, hard-approx or james-stein)")]
    UnknownRule(String),
}

impl Error {
    /// Errors caused by bad input rather than by a numerical breakdown.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::UnsupportedExponent(_)
                | Error::Dimension(_)
                | Error::InfeasibleSparsity { .. }
                | Error::Config(_)
                | Error::DegeneratePrior(_)
                | Error::UnsupportedBlockSize(_)
                | Error::UnknownRule(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
