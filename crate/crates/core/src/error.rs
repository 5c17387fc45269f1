use std::path::PathBuf;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input data (shapes, indices, file contents).
    #[error("input error: {0}")]
    Input(String),
    /// Invalid configuration values.
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite values or a diverging optimisation.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Training loss blew up.
    #[error("numeric error: training diverged at epoch {epoch} (train loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by non-finite arithmetic or divergence.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_) | Error::Diverged { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
