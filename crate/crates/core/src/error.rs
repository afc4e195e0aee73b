use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the set where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("stability index {alpha} is outside the numerically supported range [{lo}, {hi}]")]
    Unsupported { alpha: f64, lo: f64, hi: f64 },

    /// Adaptive quadrature ran out of subdivisions. The partial value is kept so
    /// callers can decide whether it is still useful.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (value {value}, error estimate {error_estimate})"
    )]
    QuadratureFailure {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error(
        "direction {index} is mapped to the zero vector; the directional operator is undefined"
    )]
    DegenerateDirection { index: usize },

    #[error("spectral measure is not symmetric; call `symmetrize` first")]
    Asymmetric,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
