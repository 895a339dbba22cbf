use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

/// Failure of a command, carrying the process exit status it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    /// Density vanishes at a finite point.
    #[error("assumption hard-reject: {0}")]
    Rejected(String),

    #[error("solver abort: {0}")]
    Aborted(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A verification suite found at least one violating instance.
    #[error("verification failed: {0}")]
    Violation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) | CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Rejected(_) => 3,
            CliError::Aborted(_) => 4,
            CliError::Numerical(_) => 5,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<nsvac::Error> for CliError {
    fn from(e: nsvac::Error) -> Self {
        use nsvac::Error as E;
        let msg = e.to_string();
        match e {
            E::Parameter { .. } | E::Usage(_) | E::Table(_) => CliError::Config(msg),
            E::InteriorVacuum { .. } => CliError::Rejected(msg),
            E::Aborted { .. } => CliError::Aborted(msg),
            E::NonFinite { .. }
            | E::NotDiagonallyDominant { .. }
            | E::ZeroPivot { .. }
            | E::EmptyRegion
            | E::NonMonotoneLadder { .. } => CliError::Numerical(msg),
        }
    }
}
