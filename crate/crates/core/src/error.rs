use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the region where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("exponent overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("series did not converge: {0}")]
    NotConverged(String),

    /// The discrete problem has no usable solution (vanishing pivot, or the
    /// normalizing value `u(S)` is numerically zero).
    #[error("singular system: {0}")]
    Singular(String),

    #[error("diffusion coefficient vanishes at interior point x = {x}")]
    DegenerateCoefficient { x: f64 },

    #[error("inversion method unsuitable: {0}")]
    MethodUnsuitable(String),

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("support mismatch: {0}")]
    Support(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
