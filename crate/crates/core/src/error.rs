use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error(
        "cannot bi-normalize eigenpair cluster near E = {energy} \
         (overlap conditioning {conditioning:.3e}); matrix is close to an exceptional point"
    )]
    PairingFailure { energy: num_complex::Complex64, conditioning: f64 },

    #[error("base energy {base} lies on the spectrum of H(theta) at theta = {theta}")]
    BaseOnSpectrum { base: f64, theta: f64 },

    #[error("winding refinement exceeded {points} flux points")]
    NonConvergent { points: usize },

    #[error("winding {value} is not within 1e-3 of an integer")]
    NotQuantized { value: f64 },

    #[error("no state ever crosses the IPR threshold {threshold}")]
    NoLocalizedStates { threshold: f64 },

    #[error("occupied set is empty")]
    EmptyOccupation,

    #[error("need at least 3 levels for gap ratios, got {0}")]
    TooFewLevels(usize),

    #[error("invalid sweep plan: {0}")]
    InvalidPlan(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidValue { key: key.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
