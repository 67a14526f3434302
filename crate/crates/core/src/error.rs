use thiserror::Error;

/// Errors raised by the geometric kernels, the flow driver and the labs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve leaves chart at vertex {index} (|x| = {radius})")]
    CurveLeavesChart { index: usize, radius: f64 },

    #[error("immersion failure: {0}")]
    Immersion(String),

    #[error("insufficient resolution: jet order {order} needs at least {needed} vertices, have {have}")]
    InsufficientResolution { order: usize, needed: usize, have: usize },

    #[error("insufficient jet: order {needed} required, {available} available")]
    InsufficientJet { needed: usize, available: usize },

    #[error("degenerate curve: length {0} below 1e-6")]
    DegenerateCurve(f64),

    #[error("inadmissible b^2 = {b2}: must lie in [{lower}, {upper}] and be non-zero")]
    InadmissibleB { b2: f64, lower: f64, upper: f64 },

    #[error("invalid space form: {0}")]
    InvalidSpace(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("support-volume condition violated: {0}")]
    SupportVolume(String),

    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
