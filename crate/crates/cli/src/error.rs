use std::fmt;
use std::process::ExitCode;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Usage(_) => 1,
            Self::Validation(_) => 2,
            Self::Numeric(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => f.write_str(m.trim_end()),
            Self::Validation(m) => write!(f, "invalid input: {m}"),
            Self::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<syncphase::SignalError> for CliError {
    fn from(e: syncphase::SignalError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<syncphase::PdfError> for CliError {
    fn from(e: syncphase::PdfError) -> Self {
        match e {
            syncphase::PdfError::Quadrature(_) => Self::Numeric(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}
