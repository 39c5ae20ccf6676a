use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {asymmetry:e}")]
    NonSymmetric {
        row: usize,
        col: usize,
        asymmetry: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (must be between 1 and {max})", max = crate::matcore::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("malformed matrix: {0}")]
    Malformed(String),

    #[error("eigenvalue {value} lies outside the domain {domain} of {function}")]
    DomainViolation {
        value: f64,
        domain: String,
        function: String,
    },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("{function} changes sign or vanishes on [{m}, {big_m}]")]
    SignChange {
        function: String,
        m: f64,
        big_m: f64,
    },

    #[error("chord slope {mu:e} is too small for a critical point")]
    DegenerateChord { mu: f64 },

    #[error("weight {0} is outside [0, 1]")]
    InvalidWeight(f64),

    #[error("invalid interval [{m}, {big_m}]")]
    InvalidBounds { m: f64, big_m: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("unknown check identifier {0:?}")]
    UnknownCheck(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            what,
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
