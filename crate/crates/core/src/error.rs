use thiserror::Error;

/// Errors raised by the numerical routines and the analysis driver.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A monotone inversion failed to converge; the lift is not monotone.
    #[error("convergence failure in {op}: {detail}")]
    Convergence { op: &'static str, detail: String },

    /// A requested enumeration exceeds the configured size guard.
    #[error("resource guard in {op}: {detail}")]
    Resource { op: &'static str, detail: String },

    /// An internally produced structure failed its own invariant check.
    #[error("structural error in {op}: {detail}")]
    Structural { op: &'static str, detail: String },

    /// A point is too close to the unit circle for the Poisson quadrature.
    #[error("point {re}+{im}i violates the boundary barrier |z| <= 1 - 2^-20")]
    Proximity { re: f64, im: f64 },

    /// Invalid map specification or analysis configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A non-finite intermediate value was produced.
    #[error("non-finite value in {op}: {detail}")]
    NonFinite { op: &'static str, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn resource(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Resource { op, detail: detail.into() }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::Config(_) | Error::Json(_) | Error::Resource { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_lambda(op: &'static str, lambda: f64) -> Result<()> {
    if !(lambda > -1.0) || !lambda.is_finite() {
        return Err(Error::domain(
            op,
            format!("lambda = {lambda} is outside (-1, inf); the endpoint lambda = -1 is excluded"),
        ));
    }
    Ok(())
}
