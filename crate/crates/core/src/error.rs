use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum EvtError {
    #[error("too few exceedances: {n} (need at least {min})")]
    TooFewExceedances { n: usize, min: usize },

    #[error("optimizer did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("all excesses are equal; quantile range is degenerate")]
    DegenerateRange,

    #[error("interexceedance moment denominator is zero")]
    DegenerateDenominator,

    #[error("probability {0} outside the admissible range")]
    InvalidProbability(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ticker {ticker}: no quote at or before the first grid second")]
    MissingHistory { ticker: String },

    #[error("ticker {ticker}: nonpositive price {price} at column {column}")]
    NonpositivePrice { ticker: String, column: usize, price: f64 },

    #[error("row {ticker} has zero variance")]
    ZeroVariance { ticker: String },

    #[error("trading days overlap or are not increasing at day {index}")]
    OverlappingDays { index: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("correlation matrix is near singular: smallest eigenvalue {min_eigenvalue:e}")]
    NearSingular { min_eigenvalue: f64 },

    #[error("volatility profile is degenerate at intraday index {index}")]
    ZeroProfile { index: usize },

    #[error("window {window} too large for series of length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("invalid factor loadings: {0}")]
    InvalidLoadings(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl EvtError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            EvtError::NonConvergence { .. }
                | EvtError::DegenerateRange
                | EvtError::DegenerateDenominator
                | EvtError::NearSingular { .. }
                | EvtError::TooFewExceedances { .. }
                | EvtError::ZeroProfile { .. }
                | EvtError::ZeroVariance { .. }
        )
    }

    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            EvtError::TooFewExceedances { .. } => "TooFewExceedances",
            EvtError::NonConvergence { .. } => "NonConvergence",
            EvtError::DegenerateRange => "DegenerateRange",
            EvtError::DegenerateDenominator => "DegenerateDenominator",
            EvtError::InvalidProbability(_) => "InvalidProbability",
            EvtError::InvalidArgument(_) => "InvalidArgument",
            EvtError::MissingHistory { .. } => "MissingHistory",
            EvtError::NonpositivePrice { .. } => "NonpositivePrice",
            EvtError::ZeroVariance { .. } => "ZeroVariance",
            EvtError::OverlappingDays { .. } => "OverlappingDays",
            EvtError::NotSymmetric { .. } => "NotSymmetric",
            EvtError::NearSingular { .. } => "NearSingular",
            EvtError::ZeroProfile { .. } => "ZeroProfile",
            EvtError::WindowTooLarge { .. } => "WindowTooLarge",
            EvtError::InvalidLoadings(_) => "InvalidLoadings",
            EvtError::Schema(_) => "Schema",
            EvtError::Io(_) => "Io",
            EvtError::Csv(_) => "Csv",
            EvtError::Json(_) => "Json",
        }
    }
}

pub type Result<T, E = EvtError> = std::result::Result<T, E>;
