use thiserror::Error;

/// Errors raised by the numerical kernels and the detector/simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error(
        "{func} did not converge after {terms} terms \
         (largest term {largest_term:e}, cancellation ratio {cancellation:e})"
    )]
    Convergence {
        func: &'static str,
        terms: usize,
        largest_term: f64,
        cancellation: f64,
    },

    #[error(
        "{func}: probability {value} lies outside [0, 1] by more than the permitted rounding slack"
    )]
    Accuracy { func: &'static str, value: f64 },

    #[error("quadrature did not reach tolerance {abs_tol:e} within {evals} evaluations (error estimate {est_error:e})")]
    Quadrature {
        abs_tol: f64,
        evals: usize,
        est_error: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        func,
        msg: msg.into(),
    }
}
