use thiserror::Error;

use estate_core::Error as LedgerError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_AUTH: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed command line or argument.
    #[error("ParseError: {0}")]
    Usage(String),
    #[error("{}: {}", .0.code(), .0)]
    Ledger(#[from] LedgerError),
    #[error("IoError: {0}")]
    Io(String),
    #[error("line {line}: {source}")]
    Script { line: usize, source: Box<CliError> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_PARSE,
            CliError::Ledger(LedgerError::Parse(_)) => EXIT_PARSE,
            CliError::Ledger(e) if e.is_authorization() => EXIT_AUTH,
            CliError::Ledger(_) | CliError::Io(_) => EXIT_DOMAIN,
            CliError::Script { source, .. } => source.exit_code(),
        }
    }

    /// Error code printed alongside the message.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "ParseError",
            CliError::Ledger(e) => e.code(),
            CliError::Io(_) => "IoError",
            CliError::Script { source, .. } => source.code(),
        }
    }
}

pub fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
