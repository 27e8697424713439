use thiserror::Error;

/// Failures of a subcommand, each with its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", config_message(*line, key, message))]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn config_message(line: usize, key: &str, message: &str) -> String {
    if line == 0 {
        format!("config: `{key}`: {message}")
    } else {
        format!("config line {line}: `{key}`: {message}")
    }
}

impl CliError {
    /// 1 for invalid input, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<fowler_core::Error> for CliError {
    fn from(e: fowler_core::Error) -> Self {
        use fowler_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::EmptyTruncation | E::LengthMismatch { .. } => {
                CliError::Validation(e.to_string())
            }
            E::QuadratureFailed { .. }
            | E::UndefinedPhaseDelay
            | E::BlowUp { .. }
            | E::Study(_) => CliError::Numerical(e.to_string()),
        }
    }
}
