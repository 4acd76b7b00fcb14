use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("index out of range: {0}")]
    Range(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the caller's data or arguments rather than
    /// a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Param(_) | Error::Input(_) | Error::Range(_))
    }
}
