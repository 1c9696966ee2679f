use std::fmt;

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or values (64).
    Usage(String),
    /// A checked property failed (2).
    Violation(String),
    /// A search or round budget ran out (3).
    Budget(String),
    /// Valid request the tool cannot serve (65).
    Unsupported(String),
    /// Reading or writing files (74).
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Violation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Unsupported(_) => 65,
            CliError::Io(_) => 74,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Violation(m) => write!(f, "violation: {m}"),
            CliError::Budget(m) => write!(f, "budget: {m}"),
            CliError::Unsupported(m) => write!(f, "unsupported: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
