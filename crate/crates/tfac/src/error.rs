//! Crate-wide error type.
//!
//! Configuration and mesh construction report what the user got wrong in a
//! single line. Solver errors carry the step index at which the run died.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// A flag, config key, or parameter combination is invalid.
    Config(String),
    /// A time mesh could not be built from the requested parameters.
    Mesh(String),
    /// The time stepper hit a state it cannot continue from.
    Solver { step: usize, message: String },
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Mesh(msg) => write!(f, "mesh error: {msg}"),
            Error::Solver { step, message } => write!(f, "solver error at step {step}: {message}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
