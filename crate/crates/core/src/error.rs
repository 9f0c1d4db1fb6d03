use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected}, found {found}")]
    GridMismatch { expected: String, found: String },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("field is not hermitian: inverse transform would not be real")]
    SymmetryViolation,

    #[error("x-antiderivative is ill-posed: xi=0 fiber carries {ratio:.3e} of the total mass")]
    IllPosedInversion { ratio: f64 },

    #[error(
        "gevrey weight overflow: sigma*|xi|max exceeds {limit}; max admissible sigma1 for this grid is {max_sigma1:.6}"
    )]
    OverflowGuard { limit: f64, max_sigma1: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bilinear parameters inadmissible: {0}")]
    Inadmissible(String),

    #[error("time window must have an even number of intervals, got {0}")]
    OddWindow(usize),

    #[error("picard iteration diverged after {iterations} iterates (distances not decreasing); try a smaller delta")]
    Diverged { iterations: usize },

    #[error("numerical blow-up in the step from t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("insufficient spectral support: {usable} usable shells in band, need at least {needed}")]
    InsufficientSupport { usable: usize, needed: usize },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("config parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    ConfigParse { line: Option<usize>, message: String },

    #[error("config value out of range for `{field}`: {reason}")]
    ConfigRange { field: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than numerics or I/O.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidParameter { .. }
                | Error::Inadmissible(_)
                | Error::OverflowGuard { .. }
                | Error::OddWindow(_)
                | Error::ConfigParse { .. }
                | Error::ConfigRange { .. }
        )
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self, Error::BlowUp { .. } | Error::Diverged { .. })
    }
}
