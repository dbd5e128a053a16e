use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state is post-blow-up")]
    BlownUpState,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("omega below growth bound (omega - mu = {gap} at mode {mode})")]
    OmegaBelowGrowthBound { mode: usize, gap: f64 },

    #[error("norm unbounded at t=0 for alpha={0}")]
    UnboundedAtZero(f64),

    #[error("exponent out of admissible range: d={d}, alpha={alpha}")]
    ExponentOutOfRange { d: f64, alpha: f64 },

    #[error("B2 must be zero-class")]
    NotZeroClass,

    #[error("time {t} exceeds input horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("initial state not in X_alpha")]
    NotInFractionalSpace,

    #[error("compatibility condition violated: {0}")]
    CompatibilityViolated(String),

    #[error("no global certificate declared: {0}")]
    MissingCertificate(String),

    #[error("origin is not an equilibrium (|f(0,0)| = {0})")]
    NotAnEquilibrium(f64),

    #[error("invalid K_infinity function: {0}")]
    NotKInfinity(String),

    #[error("boundary control system invariant failed: {0}")]
    BcsInvariant(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
