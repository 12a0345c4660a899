use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied invalid arguments or mismatched shapes.
    #[error("usage error: {0}")]
    Usage(String),

    /// A numerical precondition failed (non-PSD input, singular power, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Malformed file contents.
    #[error("format error: {0}")]
    Format(String),

    /// Training hit a non-finite objective or gradient.
    #[error(
        "non-finite objective at epoch {epoch}, batch {batch} \
         (|W|={w_norm:e}, |c|={c_norm:e}, |A|={a_norm:e}, |b|={b_norm:e})"
    )]
    NonFinite {
        epoch: usize,
        batch: usize,
        w_norm: f64,
        c_norm: f64,
        a_norm: f64,
        b_norm: f64,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Internal invariant violated; indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
