use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used by callers to map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Stability,
    Fit,
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "spectrum normalization: target cumulative energy {target:.6e} exceeds total spectral energy {total:.6e}; check u0, epsilon and eta"
    )]
    SpectrumNormalization { total: f64, target: f64 },

    #[error("operation not supported in dimension {dim}")]
    UnsupportedDimension { dim: usize },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("fictive step called without a matching interacting step (no stored noise)")]
    CouplingOrder,

    #[error("exact assignment limited to {cap} points, got {n}; use the 1D or coupled estimator")]
    Size { n: usize, cap: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("CFL violation: dt = {dt:.6e} exceeds admissible dt = {admissible:.6e}")]
    Stability { dt: f64, admissible: f64 },

    #[error("negative density {value:.3e} in cell {cell} after step")]
    Positivity { cell: usize, value: f64 },

    #[error("fit failure: {0}")]
    FitFailure(String),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::InvalidInput(_)
            | Error::UnsupportedDimension { .. }
            | Error::UnsupportedConfiguration(_)
            | Error::Size { .. }
            | Error::SpectrumNormalization { .. } => ErrorKind::Config,
            Error::Stability { .. } | Error::Positivity { .. } => ErrorKind::Stability,
            Error::FitFailure(_) => ErrorKind::Fit,
            Error::CouplingOrder | Error::InsufficientData(_) | Error::Domain(_) => {
                ErrorKind::Numerical
            }
        }
    }
}
