use thiserror::Error;

/// Errors produced by the numerical kernel and its I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("exponent value {value} at index {index} is below the class floor {floor}")]
    SpecOutOfRange { index: usize, value: f64, floor: f64 },
    #[error("exponent is not in class P: value {value} < 1 at index {index}")]
    NotInClassP { index: usize, value: f64 },
    #[error("bad bounds: {0}")]
    BadBounds(String),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("could not bracket the infimum after {0} doubling/halving steps")]
    BracketFailure(usize),
    #[error("q has infinite entries; the closed-form modular needs q_plus < inf")]
    QPlusInfinite,
    #[error("brute force limited to {limit} degrees of freedom, instance has {dof}")]
    TooLargeForBrute { dof: usize, limit: usize },
    #[error("none of the normability conditions COND1, COND2, COND3 holds")]
    NotNormable,
    #[error("grid too small for the filter bank: nu_max = {0} < 3")]
    GridTooSmall(i64),
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),
    #[error("complex-valued integrand where a real one is required")]
    ComplexIntegrand,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::BracketFailure(_)
                | Error::TooLargeForBrute { .. }
                | Error::NotNormable
                | Error::QPlusInfinite
                | Error::UnsupportedExponent(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
