use thiserror::Error;

pub type Result<T> = std::result::Result<T, GprError>;

#[derive(Debug, Error)]
pub enum GprError {
    #[error("invalid grid dimensions {lx}x{ly}: both sides must be at least 2")]
    Dimension { lx: usize, ly: usize },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("sample has no observed sites")]
    EmptySample,

    #[error("degenerate sample range: all observed values equal {0}")]
    DegenerateRange(f64),

    #[error("angle {angle} at site {site} lies outside [0, 2pi]")]
    AngleRange { site: usize, angle: f64 },

    #[error("angle at site {0} is unset")]
    UnsetAngle(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("bias field mode requires a bias field")]
    MissingBiasField,

    #[error("relative errors undefined: true value is zero at sites {0:?}")]
    ZeroTruth(Vec<usize>),

    #[error("too few observed sites: need at least {needed}, got {got}")]
    TooFewObserved { needed: usize, got: usize },

    #[error("series oracle supports only finite orders up to 64")]
    OracleUnsupported,

    #[error("cannot aggregate an empty list of metric sets")]
    EmptyAggregate,

    #[error("{file}: row {row}, column {column}: {reason}")]
    Parse {
        file: String,
        row: usize,
        column: usize,
        reason: String,
    },

    #[error("sweep cell (config {config}, cell {cell}): {source}")]
    Cell {
        config: usize,
        cell: usize,
        #[source]
        source: Box<GprError>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GprError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        GprError::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
