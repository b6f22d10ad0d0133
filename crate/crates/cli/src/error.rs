use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Malformed TOML.
    Parse { line: usize, column: usize, message: String },
    /// Well-formed input that violates the schema or a validation rule.
    Schema { key: String, message: String },
    Io(std::io::Error),
    /// The library could not compute a requested value.
    Numeric(canonical_weyl::Error),
    /// A checked inequality or law failed at `count` points.
    Violation { count: usize },
}

impl CliError {
    pub fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema { key: key.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation { .. } => 2,
            CliError::Parse { .. } | CliError::Schema { .. } | CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { line, column, message } => write!(f, "parse error at line {line}, column {column}: {message}"),
            CliError::Schema { key, message } => write!(f, "schema error at `{key}`: {message}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
            CliError::Violation { count } => write!(f, "{count} check(s) violated"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<canonical_weyl::Error> for CliError {
    fn from(e: canonical_weyl::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
