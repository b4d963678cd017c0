use std::fmt;

/// Error type shared by every module in this crate.
#[derive(Debug)]
pub enum Error {
    /// Malformed or out-of-domain input (bad permutation, index out of range,
    /// incompatible spec length, invalid configuration).
    Input(String),
    /// A request exceeded an explicit size guard (enumeration limit, graph
    /// memory guard). Distinct from `Input` so callers can map it to a
    /// different exit code.
    Capacity(String),
    /// Closed forms for the posted quantity are only valid when `n >= 2d`;
    /// requests outside that regime are refused rather than extrapolated.
    UnsupportedRegime(String),
    /// Filesystem failure while persisting or loading results.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Input(msg) => write!(f, "input error: {msg}"),
            Error::Capacity(msg) => write!(f, "capacity error: {msg}"),
            Error::UnsupportedRegime(msg) => write!(f, "unsupported regime: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
