use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rank-deficient interference matrix (condition number {0:.3e})")]
    RankDeficient(f64),
    #[error("undefined fairness: all entries are zero")]
    UndefinedFairness,
    #[error("negative or non-finite entry in fairness input")]
    InvalidFairnessInput,
    #[error("zero-norm vector")]
    ZeroVector,
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("DZF undefined for Nt < B (Nt = {antennas}, B = {bs_count})")]
    DzfUndefined { antennas: usize, bs_count: usize },
    #[error("zero effective channel: intended channel is orthogonal to the null space")]
    ZeroEffectiveChannel,
    #[error("metric not computable for Nt < B: use metric_mus2 or metric_nspa")]
    MusUndefined,
    #[error("malformed candidate set: {0}")]
    MalformedSet(String),
    #[error("incomplete backhaul: {0}")]
    IncompleteBackhaul(String),
    #[error("empty user pool at BS {0}")]
    EmptyPool(usize),
    #[error("invalid network configuration: {0}")]
    InvalidNetwork(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("approximation requires Nt >= B")]
    RequiresPowerLimited,
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
