use thiserror::Error;

/// Failure kinds shared by every module of the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("construction failure: {0}")]
    ConstructionFailure(String),
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),
    #[error("infeasible configuration: {0}")]
    InfeasibleConfiguration(String),
    #[error("undefined direction: {0}")]
    UndefinedDirection(String),
    #[error("infeasible start: {0}")]
    InfeasibleStart(String),
    #[error("no feasible entry in the energy landscape")]
    EmptyLandscape,
    #[error("input contains no particles")]
    EmptyInput,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
