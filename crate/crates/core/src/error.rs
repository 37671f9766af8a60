use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function (e.g. `|y| >= 1`).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested quantity only exists in the symmetry-broken phase
    /// (`2 * j0bar > 1`), or vice versa.
    #[error("phase error: {0}")]
    Phase(String),

    /// A root solve did not reach its residual tolerance.
    #[error("root solve did not converge: {0}")]
    Convergence(String),

    /// Log-domain arithmetic produced a non-finite value.
    #[error("overflow: {0}")]
    Overflow(String),

    /// The state lies outside the region where the requested field or
    /// Lyapunov function is defined.
    #[error("region error: {0}")]
    Region(String),

    /// The integrated state left the modelled region (`|y|` or `|z|` above the
    /// blow-up threshold).
    #[error("trajectory blew up at t = {t}: {detail}")]
    Blowup { t: f64, detail: String },

    /// Malformed parameters (non-positive coupling, bad grid, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
