use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("state does not decay at the {side} boundary (|psi|^2 = {density:e}, limit {limit:e})")]
    BoundaryDecay { side: &'static str, density: f64, limit: f64 },

    #[error("momentum content reaches {fraction:.3} of the Nyquist band (relative amplitude {amplitude:e})")]
    MomentumAliasing { fraction: f64, amplitude: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("zero vector cannot be normalized")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("displacement outside the Nyquist range: |{axis}| = {value} exceeds {limit}")]
    Nyquist { axis: &'static str, value: f64, limit: f64 },

    #[error("shifted Wigner grid covers only {coverage:.6} of the |W| mass")]
    Coverage { coverage: f64 },

    #[error("no fringes detected ({sign_changes} sign changes, need at least 4)")]
    NoFringes { sign_changes: usize },

    #[error("insufficient ringing: found {found}, need at least {needed}")]
    InsufficientRinging { found: usize, needed: usize },

    #[error("series is not effectively real (max|Im|/max|Re| = {ratio:e}); use modulus-minima mode")]
    NotReal { ratio: f64 },

    #[error("outside the numerical domain: {0}")]
    Domain(String),

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
