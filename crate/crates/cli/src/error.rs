use std::fmt;
use std::path::Path;

use vline_core::ErrorClass;

/// Failure of a command, carrying the exit status class.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Math(String),
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Math(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn at(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Math(m) => write!(f, "math error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<vline_core::Error> for CliError {
    fn from(e: vline_core::Error) -> Self {
        let msg = e.to_string();
        match e.class() {
            ErrorClass::Config => CliError::Config(msg),
            ErrorClass::Math => CliError::Math(msg),
            ErrorClass::Io => CliError::Io(msg),
        }
    }
}

/// Attaches the file name to core errors raised while reading or writing it.
pub fn in_file<T>(path: &Path, r: vline_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e.class() {
        ErrorClass::Io => CliError::at(path, e),
        _ => e.into(),
    })
}
