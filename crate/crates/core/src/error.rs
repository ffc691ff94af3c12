use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),

    #[error("invalid ground station: {0}")]
    InvalidGroundStation(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("invalid contact search parameters: {0}")]
    InvalidSearch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid data request: {0}")]
    InvalidData(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("global model diverged at round {round}: non-finite coordinate after aggregation")]
    Diverged { round: u64 },

    #[error("staleness undefined for satellite {0}: fewer than two participations")]
    NoPriorParticipation(usize),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Short stable tag used in machine-readable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConstellation(_) => "invalid_constellation",
            Error::InvalidGroundStation(_) => "invalid_ground_station",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::InvalidSearch(_) => "invalid_search",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidData(_) => "invalid_data",
            Error::NonFinite(_) => "non_finite",
            Error::Diverged { .. } => "diverged",
            Error::NoPriorParticipation(_) => "no_prior_participation",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}
