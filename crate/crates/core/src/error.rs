use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
///
/// Variants are grouped so callers (the CLI in particular) can map them onto
/// a small set of exit statuses with [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode image {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("y4m stream: {0}")]
    Y4m(String),
    #[error("unsupported pixel format: {0}")]
    UnsupportedFormat(String),
    #[error("no frames found in {0}")]
    EmptyInput(PathBuf),
    #[error("frame {index} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    MixedDimensions {
        index: usize,
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("pyramid depth {depth} too large for {width}x{height}")]
    DepthTooLarge {
        depth: usize,
        width: usize,
        height: usize,
    },
    #[error("no dominant correlation peak")]
    NoDominantPeak,
    #[error("malformed report: {0}")]
    MalformedReport(String),
    #[error("unknown report schema version {0}")]
    UnknownSchemaVersion(u64),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Processing,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::Decode { .. }
            | Error::Y4m(_)
            | Error::UnsupportedFormat(_)
            | Error::EmptyInput(_)
            | Error::MixedDimensions { .. }
            | Error::MalformedReport(_)
            | Error::UnknownSchemaVersion(_) => ErrorKind::Io,
            Error::Config(_) | Error::DepthTooLarge { .. } => ErrorKind::Config,
            Error::InvalidInput(_) | Error::ShapeMismatch(_) | Error::NoDominantPeak => {
                ErrorKind::Processing
            }
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
