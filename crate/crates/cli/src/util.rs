use std::fmt;
use std::path::Path;

use dalr::io::{read_labels, read_matrix, MatrixReader};
use dalr::{Batch, Error, ErrorKind, Matrix, RidgeConfig};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(e) => match e.kind() {
                ErrorKind::Usage => 2,
                ErrorKind::Format => 3,
                ErrorKind::Numerical => 4,
            },
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

pub fn write_text(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn ridge(lambda: Option<f64>) -> CliResult<RidgeConfig<f64>> {
    Ok(match lambda {
        Some(l) => RidgeConfig::fixed(l)?,
        None => RidgeConfig::Auto,
    })
}

pub fn labeled_batch(inputs: &Path, labels: &Path) -> CliResult<Batch> {
    let x: Matrix = read_matrix(inputs)?;
    Ok(Batch::new(x, read_labels(labels)?)?)
}

/// Visits the columns of a matrix file in blocks of at most `block`.
pub fn for_each_block(
    path: &Path,
    block: usize,
    f: impl FnMut(&Matrix) -> dalr::Result<()>,
) -> CliResult<(usize, usize)> {
    if block == 0 {
        return usage("--block must be positive");
    }
    let mut reader = MatrixReader::open(path)?;
    let shape = (reader.rows(), reader.cols());
    reader.for_each_block(block, f)?;
    Ok(shape)
}
