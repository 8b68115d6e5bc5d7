use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Exact inversion refused: the factor's smallest singular value fell
    /// below `n^-8 * s_1`.
    #[error("factor {factor_id} is numerically singular (s_min/s_max = {ratio:e})")]
    SingularAtZero { factor_id: usize, ratio: f64 },

    #[error("matrix decomposition failed: {0}")]
    Decomposition(String),

    #[error("solver did not converge (last residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("argument {0} lies on the excluded branch ray [0, +inf)")]
    BranchViolation(num_complex::Complex64),

    #[error("S-transform pole at z = -1")]
    PoleAtMinusOne,

    #[error("psi-equation is not monotone on [0, 1): {0}")]
    NonMonotone(String),

    #[error("quantile level {u} exceeds tabulated mass {mass}")]
    QuantileOutOfRange { u: f64, mass: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid matrix word: {0}")]
    InvalidWord(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical kernels (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularAtZero { .. }
                | Error::Decomposition(_)
                | Error::NoConvergence { .. }
                | Error::NonMonotone(_)
                | Error::QuantileOutOfRange { .. }
        )
    }
}
