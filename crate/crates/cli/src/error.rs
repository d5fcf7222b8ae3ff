use fdkp_core::Error;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub type CliResult<T> = Result<T, CliError>;

/// What went wrong, as printed to stderr.
#[derive(Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "validation",
            CliError::Core(e) if is_validation(e) => "validation",
            CliError::Core(Error::Io(_) | Error::Json(_)) | CliError::Io(_) => "io",
            CliError::Core(_) | CliError::CheckFailed(_) => "numerical",
        }
    }

    /// 2 for bad input, 3 for numerical failures, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "validation" => 2,
            "numerical" => 3,
            _ => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            kind: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

fn is_validation(e: &Error) -> bool {
    matches!(
        e,
        Error::NonPositiveSymbol { .. }
            | Error::SingularLongWave { .. }
            | Error::InvalidGrid(_)
            | Error::WrongModelOrder(_)
            | Error::SubcriticalSpeed { .. }
            | Error::DomainTooNarrow { .. }
            | Error::IncommensurateWavenumber { .. }
            | Error::InvalidParameter(_)
            | Error::InadmissibleScheme { .. }
    )
}
