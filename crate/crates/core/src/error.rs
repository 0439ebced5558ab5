use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants fall into three families (usage, data, numerical) which the
/// command-line front end maps onto distinct exit codes via [`Error::kind`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("parse error in {file} at row {row}, column {col}: {msg}")]
    Parse {
        file: String,
        row: usize,
        col: usize,
        msg: String,
    },

    #[error("date {0} present in one input but not the other")]
    UnmatchedDate(String),

    #[error("duplicate security id {0}")]
    DuplicateSecurity(String),

    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },

    #[error("singular factor design")]
    SingularFactorDesign,

    #[error("intercept spanned by factors (omega_hat = {0:e})")]
    InterceptSpanned(f64),

    #[error("lag {lag} exceeds sample of length {t}")]
    LagExceedsSample { lag: usize, t: usize },

    #[error("sample too short for split: T = {t}, lags ({h1}, {h2})")]
    SampleTooShort { t: usize, h1: usize, h2: usize },

    #[error("degenerate variance estimate: {0:e}")]
    DegenerateVariance(f64),

    #[error("degenerate security variance for security {0}")]
    DegenerateSecurityVariance(usize),

    #[error("dimension too small for extreme-value centering: N = {0}")]
    DimensionTooSmall(usize),

    #[error("zero-variance series")]
    ZeroVarianceSeries,

    #[error("covariance matrix not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("replication {rep} failed for {config}: {source}")]
    Replication {
        rep: u64,
        config: String,
        #[source]
        source: Box<Error>,
    },

    #[error("window starting at {start} failed: {source}")]
    Window {
        start: String,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::DimensionMismatch(_)
            | Error::NonFinite { .. }
            | Error::Parse { .. }
            | Error::UnmatchedDate(_)
            | Error::DuplicateSecurity(_)
            | Error::Io { .. } => ErrorKind::Data,
            Error::Replication { source, .. } | Error::Window { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
