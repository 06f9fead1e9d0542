use std::fmt;

use condexp::error::Error;

/// Failure classes, each with its own exit status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CliError {
    Io(String),
    Validation(String),
    Operation(String),
    SizeGuard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Operation(_) => 3,
            CliError::SizeGuard(_) => 4,
        }
    }

    /// A core error raised while checking the scenario's objects.
    pub fn validation(context: &str, e: Error) -> Self {
        match e {
            Error::SizeGuard { .. } => CliError::SizeGuard(format!("{context}: {e}")),
            _ => CliError::Validation(format!("{context}: {e}")),
        }
    }

    /// A core error raised by the dispatched operation.
    pub fn operation(context: &str, e: Error) -> Self {
        match e {
            Error::SizeGuard { .. } => CliError::SizeGuard(format!("{context}: {e}")),
            _ => CliError::Operation(format!("{context}: {e}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Operation(m) => write!(f, "operation error: {m}"),
            CliError::SizeGuard(m) => write!(f, "size guard: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
