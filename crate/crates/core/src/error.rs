use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient records: found {found}, need at least 2")]
    InsufficientRecords { found: usize },

    #[error("draw budget exhausted: {max_draws} draws produced only {found} of {wanted} records")]
    BudgetExceeded {
        max_draws: u64,
        found: usize,
        wanted: usize,
    },

    #[error("could not bracket root: {0}")]
    Bracketing(String),

    #[error("integration did not converge to {tolerance:e} within {evaluations} evaluations")]
    Integration { tolerance: f64, evaluations: usize },

    /// Too few Monte Carlo draws to resolve the requested tail percentile.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub(crate) fn check_level(level: f64) -> Result<f64> {
    if level > 0.0 && level < 1.0 {
        Ok(level)
    } else {
        Err(Error::Domain(format!("confidence level {level} not in (0, 1)")))
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {value}")))
    }
}
