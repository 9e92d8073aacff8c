use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures reading or writing `ATNF` tensor files.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TensorError {
    #[error("not a tensor file (bad magic)")]
    NotATensorFile,
    #[error("unsupported tensor format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated tensor header")]
    TruncatedHeader,
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("{0} unexpected trailing bytes after payload")]
    TrailingBytes(usize),
}

/// Failures reading `AXMP` axon-map caches.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CacheError {
    #[error("not an axon-map cache (bad magic)")]
    NotAnAxonMap,
    #[error("unsupported axon-map cache version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt cache: {0}")]
    Corrupt(String),
    #[error("cache hash mismatch: header says {stored:016x}, contents hash to {computed:016x}")]
    HashMismatch { stored: u64, computed: u64 },
    #[error("stale cache: built for key {found:016x}, run expects {expected:016x}")]
    Stale { expected: u64, found: u64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range (< {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("selection ratio {ratio} keeps zero of {n_patches} patches")]
    EmptySelection { ratio: f64, n_patches: usize },
    #[error("no training sample for class {0}")]
    MissingClass(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Tensor {
        path: PathBuf,
        #[source]
        source: TensorError,
    },
    #[error("{path}: {source}")]
    Cache {
        path: PathBuf,
        #[source]
        source: CacheError,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration/parameter errors, 3 for I/O,
    /// 4 for malformed data files.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::EmptySelection { .. }
            | Error::DimensionMismatch(_)
            | Error::IndexOutOfRange { .. }
            | Error::MissingClass(_) => 2,
            Error::Io { .. } => 3,
            Error::Image { source, .. } => match source {
                image::ImageError::IoError(_) => 3,
                _ => 4,
            },
            Error::Csv { source, .. } => match source.kind() {
                csv::ErrorKind::Io(_) => 3,
                _ => 4,
            },
            Error::Tensor { .. } | Error::Cache { .. } => 4,
        }
    }
}
