use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library and the `bench` runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter lies outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Vector lengths or layer shapes do not line up.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A function or gradient evaluation produced a non-finite value.
    #[error("non-finite evaluation in {context}{}", index.map(|i| format!(" at coordinate {i}")).unwrap_or_default())]
    NonFinite {
        context: &'static str,
        index: Option<usize>,
    },

    /// An operation was requested in a state where it is undefined.
    #[error("invalid state: {0}")]
    State(&'static str),

    /// Invalid experiment or schedule configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Shape {
            context,
            expected,
            actual,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
