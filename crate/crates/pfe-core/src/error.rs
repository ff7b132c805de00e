//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument, malformed model, or violated precondition.
    #[error("input error: {0}")]
    Input(String),

    /// Problem size exceeds a hard enumeration guard.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Malformed model file. `line` is 1-based; 0 means the location is
    /// given in the message instead.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A pipeline side ended up with no usable local solutions even after
    /// falling back to plain window filtering.
    #[error("empty local solution set on side {side} (window {window})")]
    EmptyLocalSet { side: u32, window: f64 },

    /// Inconsistent internal state (e.g. a reconstruction record referring
    /// to a variable that was never assigned).
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for CLI use: 3 for capacity guards, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: &std::path::Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}
