use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, geometry or material spec.
    #[error("{0}")]
    Config(String),
    /// Missing or unreadable input data.
    #[error("{0}")]
    Data(String),
    /// Every requested point failed to converge.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
