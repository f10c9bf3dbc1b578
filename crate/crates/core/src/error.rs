use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigenvalue iteration did not converge")]
    Eigensolver,

    #[error("placement failed: closed-loop eigenvalue {eigenvalue} misses target {target}")]
    Placement { eigenvalue: Complex64, target: f64 },

    #[error("discrete Lyapunov equation infeasible: spectral radius {radius} >= {bound}")]
    LyapunovInfeasible { radius: f64, bound: f64 },

    /// A check that the theory guarantees has failed numerically.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("not certified: monodromy spectral radius {0} is not below 1")]
    NotCertified(f64),

    #[error("simulation diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("decay rate undefined: {0}")]
    DegenerateTrajectory(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }
}
