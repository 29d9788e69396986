use thiserror::Error;

/// Errors raised by the bound engines and their numerical back ends.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the region where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation would exceed an enumeration or memory budget.
    #[error("resource budget exceeded: {what} needs {needed} items, cap is {cap}")]
    Budget {
        what: &'static str,
        needed: f64,
        cap: f64,
    },

    /// An iterative method failed to reach its tolerance.
    #[error("numeric nonconvergence in {what}: achieved {achieved:e}, wanted {wanted:e}")]
    NonConvergence {
        what: &'static str,
        achieved: f64,
        wanted: f64,
    },

    /// No sign change could be located for an inversion.
    #[error("bracketing failed: {0}")]
    Bracket(String),

    /// A bound family violated the monotonicity it is required to have.
    #[error("monotonicity check failed: {0}")]
    Monotonicity(String),

    /// A function evaluation produced NaN or an infinity where a finite value was required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// The bound is not defined for the requested source model.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
