use std::fmt;

/// Error type shared by all modules.
///
/// The split between `Structural` and `Precondition` matters to the CLI:
/// malformed input data exits with code 2, a violated domain precondition
/// (named in the message) exits with code 1.
#[derive(Debug)]
pub enum Error {
    /// Malformed data: edge endpoints outside the carrier, duplicate
    /// element names, a map that is not total, unparseable documents.
    Structural(String),
    /// A domain precondition of an operation does not hold, e.g. a
    /// non-surjective structure where surjectivity is required.
    Precondition(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Structural(msg) => write!(f, "malformed input: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
