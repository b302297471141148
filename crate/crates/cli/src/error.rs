use thiserror::Error;

/// Failure of a run, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config file or parameter values.
    #[error("configuration error: {0}")]
    Config(String),
    /// The numerics did not converge or the mesh is too coarse.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The input matrix file could not be read or parsed.
    #[error("input error: {0}")]
    Parse(String),
    /// Output files could not be written.
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Parse(_) => 4,
        }
    }
}

impl From<schmidt_core::Error> for CliError {
    fn from(e: schmidt_core::Error) -> Self {
        use schmidt_core::Error as E;
        match e {
            E::Convergence(_) | E::Resolution { .. } | E::NonFiniteAmplitude { .. } | E::NotHermitian { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}
