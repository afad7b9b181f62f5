use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dense simulation limited to N <= {limit} sites, got N = {sites}")]
    TooLarge { sites: usize, limit: usize },

    #[error("inconsistent quasiparticle spectrum: {0}")]
    Spectrum(String),

    #[error("overlap determinant is not finite")]
    IllConditioned,

    #[error("no local minimum found; extend the time grid")]
    NoMinimumFound,

    #[error("series tail has no oscillation (variance {variance:e})")]
    NoOscillation { variance: f64 },

    #[error("window [{t_min}, {t_max}] contains no samples")]
    EmptyWindow { t_min: f64, t_max: f64 },

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("state is not an X state of the Bell-diagonal family: {0}")]
    NotBellDiagonal(String),

    #[error("golden file: {0}")]
    Golden(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}
