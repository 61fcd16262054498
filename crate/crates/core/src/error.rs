use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame dimensions m={m}, n={n} (need n >= m >= 1)")]
    InvalidDimensions { m: usize, n: usize },

    #[error("column {column} has norm {norm}, expected 1")]
    NotUnitNorm { column: usize, norm: f64 },

    #[error("real frame has a nonzero imaginary part at ({row}, {column})")]
    NotReal { row: usize, column: usize },

    #[error("expected {expected} entries, found {found}")]
    DataLength { expected: usize, found: usize },

    #[error("probability p={0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("moment order d={d} outside supported range {min}..={max}")]
    UnsupportedOrder { d: usize, min: usize, max: usize },

    #[error("frame size n={n} exceeds the enumeration limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("q must be prime ≡ 3 (mod 4), got {0}")]
    InvalidHarmonicOrder(u64),

    #[error("expected subset size k={0} must exceed 1")]
    SubsetTooSmall(f64),

    #[error("frame needs at least {needed} vectors, has {n}")]
    TooFewVectors { n: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("MANOVA law with gamma={gamma}, p={p} is atomic only (no bulk density)")]
    AtomicOnly { gamma: f64, p: f64 },

    #[error("quadrature did not reach tolerance {tol}; achieved error estimate {estimate}")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("matrix is not Hermitian (max deviation {0})")]
    NotHermitian(f64),

    #[error("eigenvalue {0} is negative beyond tolerance for a positive semidefinite input")]
    NegativeEigenvalue(f64),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("empty sample")]
    EmptySample,

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
