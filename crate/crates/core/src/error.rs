use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight spec: {0}")]
    InvalidSpec(String),

    #[error("dimension {dim} exceeds s_max = {s_max}")]
    DimensionTooLarge { dim: usize, s_max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("classification error: {0}")]
    Classification(String),

    #[error("truncation box too small: {0}")]
    BoxTooSmall(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("rate fit failed: {0}")]
    Fit(String),

    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Machine-readable tag used by the CLI error record.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::DimensionTooLarge { .. } => "dimension",
            Error::Domain(_) => "domain",
            Error::Range(_) => "range",
            Error::Classification(_) => "classification",
            Error::BoxTooSmall(_) => "box_too_small",
            Error::Overflow(_) => "overflow",
            Error::Fit(_) => "fit",
            Error::Parse { .. } => "parse",
            Error::Numerical(_) => "numerical",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// True for errors caused by bad user input (CLI exit code 2).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::DimensionTooLarge { .. }
                | Error::Domain(_)
                | Error::Range(_)
                | Error::Classification(_)
                | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
