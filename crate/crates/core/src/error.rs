use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Gamma function pole at x = {0}")]
    Pole(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Riemann-Liouville operators integrate from 0, but the grid starts at t0 = {0}")]
    NonZeroOrigin(f64),

    #[error("quadrature did not reach tolerance {requested:e} (estimate {achieved:e})")]
    Tolerance { requested: f64, achieved: f64 },

    #[error("degenerate Hurst index H = {hurst}: {reason}")]
    DegenerateHurst { hurst: f64, reason: &'static str },

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("covariance matrix is not positive definite (pivot {pivot} after {jitter_attempts} jitter attempts)")]
    NotPositiveDefinite {
        pivot: usize,
        jitter_attempts: usize,
    },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("density reaches the boundary: edge/peak ratio {ratio:e} exceeds {limit:e}")]
    BoundaryMass { ratio: f64, limit: f64 },

    #[error("CFL violation: dt = {dt:e} exceeds the stable limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
