use std::path::PathBuf;

use thiserror::Error;

use crate::ingest::Month;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing required column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("duplicate loan id(s): {}", .0.join(", "))]
    DuplicateIds(Vec<String>),

    #[error("unknown loan status {0:?} (not covered by the status table)")]
    UnknownStatus(String),

    #[error("bad record: {0}")]
    BadRecord(String),

    #[error("unparseable month {0:?}")]
    BadMonth(String),

    #[error("column {0} has no observed values, cannot impute")]
    AllMissing(String),

    #[error("macro data missing month(s): {}", join_months(.0))]
    MissingMacroMonths(Vec<Month>),

    #[error("duplicate macro row for month {0}")]
    DuplicateMacroMonth(Month),

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("singular design matrix: {0}")]
    Singular(String),

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

fn join_months(months: &[Month]) -> String {
    months.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Stable snake-case name for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::MissingColumns(_) => "missing_columns",
            Error::DuplicateIds(_) => "duplicate_ids",
            Error::UnknownStatus(_) => "unknown_status",
            Error::BadRecord(_) => "bad_record",
            Error::BadMonth(_) => "bad_month",
            Error::AllMissing(_) => "all_missing",
            Error::MissingMacroMonths(_) => "missing_macro_months",
            Error::DuplicateMacroMonth(_) => "duplicate_macro_month",
            Error::InsufficientHistory(_) => "insufficient_history",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Singular(_) => "singular",
            Error::ZeroVariance => "zero_variance",
            Error::NonFinite(_) => "non_finite",
            Error::Checkpoint(_) => "checkpoint",
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 1,
            Error::Singular(_) | Error::ZeroVariance | Error::NonFinite(_) => 3,
            _ => 2,
        }
    }
}
