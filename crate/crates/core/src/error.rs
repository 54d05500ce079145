//! Error type shared by every module in the crate.

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A parameter violated a documented invariant.
    #[error("invalid input for `{field}`: {message}")]
    InvalidInput {
        field: &'static str,
        message: String,
    },

    /// The Mittag-Leffler evaluator exhausted its iteration budget.
    #[error("Mittag-Leffler evaluation did not converge for alpha={alpha}, beta={beta}, z={z}")]
    MlfNonConvergence { alpha: f64, beta: f64, z: f64 },

    /// The Laplace-transform identity is requested outside its convergence region.
    #[error("Laplace transform diverges: lambda^alpha = {lambda_pow} <= |gamma| = {gamma_abs}")]
    LaplaceDivergence { lambda_pow: f64, gamma_abs: f64 },

    /// A numerical routine produced a non-finite intermediate value.
    #[error("numerical failure in {context}: {message}")]
    Numerical {
        context: &'static str,
        message: String,
    },
}

impl Error {
    pub fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
