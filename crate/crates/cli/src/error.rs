use std::fmt;

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A check did not pass; the message goes to stderr.
    Failed(String),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or parameter values; exit code 2.
    Usage(String),
    /// The computation itself failed; exit code 1.
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Run(m) => f.write_str(m),
        }
    }
}

impl From<mle_expansion::Error> for CliError {
    fn from(e: mle_expansion::Error) -> Self {
        use mle_expansion::Error as E;
        match e {
            E::InvalidArgument(_) | E::Family(_) | E::UnsupportedOrder(_) => CliError::Usage(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
