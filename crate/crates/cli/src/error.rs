use measure_bench_core::measures::MeasureError;
use measure_bench_core::partition::PartitionError;
use measure_bench_core::regression::RegressionError;
use measure_bench_core::report::ReportError;
use measure_bench_core::sweep::{ConfigError, CsvError, SweepError};
use measure_bench_core::transforms::TransformError;
use measure_bench_core::typology::TypologyError;

/// Failure of a subcommand. Each variant maps to its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    /// 2 usage, 3 invalid parameters, 4 I/O, 5 malformed input, 6 analysis.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Invalid(_) => 3,
            Self::Io { .. } => 4,
            Self::Malformed(_) => 5,
            Self::Analysis(_) => 6,
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        match e {
            CsvError::Io { path, source } => Self::Io {
                path,
                message: source.to_string(),
            },
            other => Self::Malformed(other.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Parse(_) => Self::Malformed(e.to_string()),
            ConfigError::Grid(_) => Self::Invalid(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { path, source } => Self::Io {
                path,
                message: source.to_string(),
            },
            ReportError::Incomplete(_) => Self::Malformed(e.to_string()),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Invalid(e.to_string())
            }
        }
    )*};
}

macro_rules! analysis_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Analysis(e.to_string())
            }
        }
    )*};
}

invalid_from!(SweepError, PartitionError, TransformError, MeasureError);
analysis_from!(RegressionError, TypologyError);
