use std::fmt;

/// A failed run, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent configuration (exit 2).
    Config(String),
    /// Parameters outside a model's domain, e.g. an unstable queue (exit 2).
    Domain(toi_core::Error),
    /// No feasible allocation exists (exit 4).
    Infeasible(toi_core::Error),
    /// Reading or writing files (exit 2).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Infeasible(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<toi_core::Error> for CliError {
    fn from(e: toi_core::Error) -> Self {
        match e {
            toi_core::Error::Infeasible { .. } => CliError::Infeasible(e),
            e => CliError::Domain(e),
        }
    }
}
