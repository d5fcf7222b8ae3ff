use thiserror::Error;

/// Errors raised by the simulation and stability routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel symbol is not positive at (k, l) = ({k}, {l}): {value}")]
    NonPositiveSymbol { k: f64, l: f64, value: f64 },

    #[error("long-wave dispersion relation is singular at k = 0 (l = {l})")]
    SingularLongWave { l: f64 },

    #[error("multiplier is not finite at (k, l) = ({k}, {l})")]
    NonFiniteSymbol { k: f64, l: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{0} is second order in time and has no first-order phase symbol")]
    WrongModelOrder(String),

    #[error("solitary waves require c > 1, got c = {c}")]
    SubcriticalSpeed { c: f64 },

    #[error("domain length {length} is too narrow, at least {required} is needed")]
    DomainTooNarrow { length: f64, required: f64 },

    #[error("transverse wavenumber {lambda} is not a positive multiple of 2π/Ly = {dk}")]
    IncommensurateWavenumber { lambda: f64, dk: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scheme {scheme} cannot integrate model {model}")]
    InadmissibleScheme { scheme: String, model: String },

    #[error("run became unstable at t = {time} (last valid state at t = {last_valid})")]
    UnstableRun { time: f64, last_valid: f64 },

    #[error("eigensolve failed: {0}")]
    EigensolveFailure(String),

    #[error("no linear growth window: {0}")]
    NoGrowthWindow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
