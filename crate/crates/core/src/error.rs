use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numeric,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("transform {kind} does not accept tubes of length {len}")]
    IncompatibleLength { kind: String, len: usize },

    #[error("numerical failure at step {step}: {what}")]
    Numerical { step: usize, what: String },

    #[error("EM iteration {iteration}: {source}")]
    Em {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("slice {slice}: {source}")]
    Slice {
        slice: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("reconstruction failure: imaginary residue {residue:e} exceeds {limit:e}")]
    Reconstruction { residue: f64, limit: f64 },

    #[error("relative error undefined: reference has zero Frobenius norm")]
    UndefinedMetric,

    #[error("no latent dimension satisfies a parameter budget of {budget}")]
    InfeasibleBudget { budget: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("refusing to overwrite existing file {0}")]
    WouldOverwrite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn numerical(step: usize, what: impl Into<String>) -> Self {
        Error::Numerical {
            step,
            what: what.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::IncompatibleLength { .. }
            | Error::InvalidArgument(_)
            | Error::InfeasibleBudget { .. }
            | Error::WouldOverwrite(_) => ErrorCategory::Config,
            Error::Dimension(_)
            | Error::Parse { .. }
            | Error::InvalidData(_)
            | Error::SchemaVersion { .. }
            | Error::Json(_)
            | Error::Toml(_)
            | Error::UndefinedMetric => ErrorCategory::Data,
            Error::Numerical { .. } | Error::Reconstruction { .. } => ErrorCategory::Numeric,
            Error::Em { source, .. } | Error::Slice { source, .. } => source.category(),
            Error::Io(_) => ErrorCategory::Io,
        }
    }
}
