use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Numerics(#[from] fundsol::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for anything the caller can fix by changing the invocation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use fundsol::Error as E;
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numerics(E::Config(_) | E::Domain(_) | E::Regime(_) | E::Io(_) | E::Cache(_)) => 2,
            CliError::Io(_) => 2,
            CliError::Numerics(_) => 1,
        }
    }
}
