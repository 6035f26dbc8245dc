use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The equal-time covariance of a rank-deficient state cannot be inverted;
    /// such a state does not explore the whole Hilbert space, so the dynamics
    /// on its kernel are invisible.
    #[error(
        "singular state: equal-time covariance has smallest singular value {min_singular:.3e} \
         (tolerance {tol:.1e}); a rank-deficient state does not sample the full Hilbert space, \
         so complete knowledge of the evolution is impossible"
    )]
    SingularState { min_singular: f64, tol: f64 },

    #[error("Gram matrix has eigenvalue {eigenvalue:.3e} below -{tol:.1e}: reconstruction is not completely positive")]
    NotCompletelyPositive { eigenvalue: f64, tol: f64 },

    #[error("linear system is rank deficient (residual {residual:.3e})")]
    RankDeficient { residual: f64 },

    #[error("invalid Gaussian covariance: smallest symplectic eigenvalue {nu:.6} < 1/2")]
    UncertaintyViolation { nu: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
