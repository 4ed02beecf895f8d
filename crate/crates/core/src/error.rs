use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure categories, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Format,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    Dimension {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("SVD failed to converge for a {rows}x{cols} matrix")]
    Decomposition { rows: usize, cols: usize },

    #[error("system is singular or not positive definite (pivot {pivot} at row {row}); use a larger ridge lambda")]
    Singular { row: usize, pivot: f64 },

    #[error("matrix is not symmetric: |m[{row},{col}] - m[{col},{row}]| = {diff}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("rank {rank} out of range 1..={max}")]
    Rank { rank: usize, max: usize },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("activation batch has no samples")]
    EmptyBatch,

    #[error("no activations: every rate is zero")]
    NoActivations,

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("label {label} at sample {sample} is outside 0..{classes}")]
    Label {
        sample: usize,
        label: usize,
        classes: usize,
    },

    #[error("bad magic at byte offset 0: expected \"DMAT\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported version {found} at byte offset 4")]
    BadVersion { found: u32 },

    #[error("unknown dtype code {found} at byte offset 8")]
    BadDtype { found: u32 },

    #[error("file truncated at byte offset {offset}: expected {expected} bytes in total")]
    Truncated { offset: u64, expected: u64 },

    #[error("trailing data at byte offset {offset}")]
    TrailingData { offset: u64 },

    #[error("non-finite value at byte offset {offset} (row {row}, col {col})")]
    NonFiniteValue { offset: u64, row: usize, col: usize },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Decomposition { .. } | Error::Singular { .. } | Error::NonFinite(_) | Error::NoActivations => {
                ErrorKind::Numerical
            }
            Error::BadMagic { .. }
            | Error::BadVersion { .. }
            | Error::BadDtype { .. }
            | Error::Truncated { .. }
            | Error::TrailingData { .. }
            | Error::NonFiniteValue { .. }
            | Error::Manifest(_)
            | Error::Io { .. } => ErrorKind::Format,
            _ => ErrorKind::Usage,
        }
    }

    pub(crate) fn dim(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::Dimension {
            op,
            left_rows: left.0,
            left_cols: left.1,
            right_rows: right.0,
            right_cols: right.1,
        }
    }

    /// An I/O failure tied to the file it concerned.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
