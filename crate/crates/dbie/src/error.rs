use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("ill-conditioned system at m={m}, E={e}: condition estimate {cond:.3e}")]
    Conditioning { m: f64, e: f64, cond: f64 },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("transmission undefined: both mode amplitudes below {0:e}")]
    UndefinedTransmission(f64),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Validation-class errors (bad input) as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Precondition(_) | Error::Validation(_) | Error::Io(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Validation(_) => "validation",
            Error::Singularity(_) => "singularity",
            Error::Numerical(_) => "numerical",
            Error::Conditioning { .. } => "conditioning",
            Error::Resource(_) => "resource",
            Error::UndefinedTransmission(_) => "undefined_transmission",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
