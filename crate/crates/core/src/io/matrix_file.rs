//! `DMAT` binary matrix files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                              |
//! |--------|------|------------------------------------|
//! | 0      | 4    | magic `b"DMAT"`                    |
//! | 4      | 4    | version, u32 = 1                   |
//! | 8      | 4    | dtype, u32 (0 = f32, 1 = f64)      |
//! | 12     | 8    | rows, u64                          |
//! | 20     | 8    | cols, u64                          |
//! | 28     | ...  | rows * cols values, row-major      |

use std::fs::File;
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"DMAT";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: u64 = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32 = 0,
    F64 = 1,
}

impl Dtype {
    pub fn size(self) -> u64 {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            found => Err(Error::BadDtype { found }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub dtype: Dtype,
    pub rows: usize,
    pub cols: usize,
}

impl Header {
    fn payload_len(&self) -> Option<u64> {
        (self.rows as u64)
            .checked_mul(self.cols as u64)?
            .checked_mul(self.dtype.size())
    }

    fn total_len(&self) -> Option<u64> {
        self.payload_len()?.checked_add(HEADER_LEN)
    }

    fn encode(&self) -> [u8; HEADER_LEN as usize] {
        let mut h = [0u8; HEADER_LEN as usize];
        h[0..4].copy_from_slice(&MAGIC);
        h[4..8].copy_from_slice(&VERSION.to_le_bytes());
        h[8..12].copy_from_slice(&(self.dtype as u32).to_le_bytes());
        h[12..20].copy_from_slice(&(self.rows as u64).to_le_bytes());
        h[20..28].copy_from_slice(&(self.cols as u64).to_le_bytes());
        h
    }
}

fn decode_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            offset: bytes.len() as u64,
            expected: HEADER_LEN,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    if bytes.len() < HEADER_LEN as usize {
        return Err(Error::Truncated {
            offset: bytes.len() as u64,
            expected: HEADER_LEN,
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::BadVersion { found: version });
    }
    let dtype = Dtype::from_code(u32_at(8))?;
    let dim = |v: u64| {
        usize::try_from(v).map_err(|_| Error::Truncated {
            offset: HEADER_LEN,
            expected: u64::MAX,
        })
    };
    Ok(Header {
        dtype,
        rows: dim(u64_at(12))?,
        cols: dim(u64_at(20))?,
    })
}

fn decode_value<T: Scalar>(dtype: Dtype, chunk: &[u8]) -> T {
    match dtype {
        Dtype::F32 => T::lit(f32::from_le_bytes(chunk.try_into().expect("4 bytes")) as f64),
        Dtype::F64 => T::lit(f64::from_le_bytes(chunk.try_into().expect("8 bytes"))),
    }
}

/// Parses a complete file image. 32-bit payloads are promoted on load.
pub fn decode_matrix<T: Scalar>(bytes: &[u8]) -> Result<DenseMatrix<T>> {
    let header = decode_header(bytes)?;
    let total = header.total_len().ok_or(Error::Truncated {
        offset: bytes.len() as u64,
        expected: u64::MAX,
    })?;
    if (bytes.len() as u64) < total {
        return Err(Error::Truncated {
            offset: bytes.len() as u64,
            expected: total,
        });
    }
    if (bytes.len() as u64) > total {
        return Err(Error::TrailingData { offset: total });
    }
    let size = header.dtype.size() as usize;
    let payload = &bytes[HEADER_LEN as usize..];
    let mut data = Vec::with_capacity(header.rows * header.cols);
    for (idx, chunk) in payload.chunks_exact(size).enumerate() {
        let v: T = decode_value(header.dtype, chunk);
        if !v.is_finite() {
            return Err(non_finite_at(&header, idx));
        }
        data.push(v);
    }
    DenseMatrix::from_vec(header.rows, header.cols, data)
}

fn non_finite_at(header: &Header, idx: usize) -> Error {
    let cols = header.cols.max(1);
    Error::NonFiniteValue {
        offset: HEADER_LEN + idx as u64 * header.dtype.size(),
        row: idx / cols,
        col: idx % cols,
    }
}

/// Serializes with the given payload precision.
pub fn encode_matrix<T: Scalar>(m: &DenseMatrix<T>, dtype: Dtype) -> Vec<u8> {
    let header = Header {
        dtype,
        rows: m.rows(),
        cols: m.cols(),
    };
    let mut out = Vec::with_capacity(header.total_len().unwrap_or(0) as usize);
    out.extend_from_slice(&header.encode());
    for &v in m.as_slice() {
        match dtype {
            Dtype::F32 => out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes()),
            Dtype::F64 => out.extend_from_slice(&v.as_f64().to_le_bytes()),
        }
    }
    out
}

pub fn read_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseMatrix<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrix(&bytes)
}

/// Writes a 64-bit payload.
pub fn write_matrix<T: Scalar>(path: impl AsRef<Path>, m: &DenseMatrix<T>) -> Result<()> {
    write_matrix_as(path, m, Dtype::F64)
}

pub fn write_matrix_as<T: Scalar>(path: impl AsRef<Path>, m: &DenseMatrix<T>, dtype: Dtype) -> Result<()> {
    let path = path.as_ref();
    if !m.is_finite() {
        return Err(Error::NonFinite("write_matrix"));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode_matrix(m, dtype))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Random-access reader that loads column blocks of a `DMAT` file without
/// reading the whole payload.
pub struct MatrixReader {
    path: PathBuf,
    file: File,
    header: Header,
}

impl MatrixReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut head = Vec::with_capacity(HEADER_LEN as usize);
        (&mut file)
            .take(HEADER_LEN)
            .read_to_end(&mut head)
            .map_err(|e| Error::io(&path, e))?;
        let header = decode_header(&head)?;
        let len = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        let total = header.total_len().ok_or(Error::Truncated {
            offset: len,
            expected: u64::MAX,
        })?;
        if len < total {
            return Err(Error::Truncated {
                offset: len,
                expected: total,
            });
        }
        if len > total {
            return Err(Error::TrailingData { offset: total });
        }
        Ok(Self { path, file, header })
    }

    pub fn header(&self) -> Header {
        self.header
    }

    pub fn rows(&self) -> usize {
        self.header.rows
    }

    pub fn cols(&self) -> usize {
        self.header.cols
    }

    /// Columns `start..end` as a `rows x (end - start)` matrix.
    pub fn read_columns<T: Scalar>(&mut self, start: usize, end: usize) -> Result<DenseMatrix<T>> {
        let Header { dtype, rows, cols } = self.header;
        if start > end || end > cols {
            return Err(Error::Range(format!("column range {start}..{end} outside 0..{cols}")));
        }
        let width = end - start;
        let size = dtype.size() as usize;
        let mut buf = vec![0u8; width * size];
        let mut data = Vec::with_capacity(rows * width);
        for i in 0..rows {
            let offset = HEADER_LEN + ((i * cols + start) * size) as u64;
            self.file
                .seek(SeekFrom::Start(offset))
                .and_then(|_| self.file.read_exact(&mut buf))
                .map_err(|e| Error::io(&self.path, e))?;
            for (j, chunk) in buf.chunks_exact(size).enumerate() {
                let v: T = decode_value(dtype, chunk);
                if !v.is_finite() {
                    return Err(non_finite_at(&self.header, i * cols + start + j));
                }
                data.push(v);
            }
        }
        DenseMatrix::from_vec(rows, width, data)
    }

    /// Visits the matrix in column blocks of at most `block` columns.
    pub fn for_each_block<T: Scalar>(
        &mut self,
        block: usize,
        mut f: impl FnMut(&DenseMatrix<T>) -> Result<()>,
    ) -> Result<()> {
        let block = block.max(1);
        let cols = self.cols();
        let mut start = 0;
        while start < cols {
            let end = (start + block).min(cols);
            f(&self.read_columns(start, end)?)?;
            start = end;
        }
        Ok(())
    }
}

/// Class labels as text, one non-negative integer per line.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|e| Error::Manifest(format!("{}: line {}: bad label {l:?}: {e}", path.display(), n + 1)))
        })
        .collect()
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
