use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular design: {0}")]
    SingularDesign(String),
    #[error("degenerate particle weights")]
    DegenerateWeights,
    #[error("unsupported particle count {0} (need at least 3)")]
    UnsupportedSize(usize),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("row {row}: {msg}")]
    Ingestion { row: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

impl Error {
    /// Validation-type errors map to exit code 1 on the command line, the rest to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_) | Error::Ingestion { .. } | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
