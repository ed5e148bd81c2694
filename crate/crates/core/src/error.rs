use thiserror::Error;

/// Errors raised by the accounting, discrete and audit routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A structurally invalid parameter combination.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A root-finder could not bracket or converge.
    #[error("no convergence: {what} (bracket [{lo}, {hi}])")]
    Convergence { what: String, lo: f64, hi: f64 },

    /// An intermediate quantity overflows the floating point range.
    #[error("range error: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}
