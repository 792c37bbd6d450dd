use std::fmt;
use std::path::PathBuf;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Core(ncna_core::Error),
    Config(String),
    Io { path: PathBuf, source: std::io::Error },
    /// A requested check (ordering, planted fit, self-test) did not hold.
    Check(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use ncna_core::Error as E;
        match self {
            CliError::Core(E::NonFinite(_) | E::RankDeficient { .. } | E::FitDiverged(_)) => 3,
            CliError::Core(_) | CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Check(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Check(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ncna_core::Error> for CliError {
    fn from(e: ncna_core::Error) -> Self {
        CliError::Core(e)
    }
}
