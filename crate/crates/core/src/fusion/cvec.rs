//! `CVEC1` vector collection container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "CVEC1\0\0\0"
//! [tag]    8 bytes  optional format tag, e.g. "FIDX1\0\0\0" for flat indexes
//! dim      u32
//! count    u64
//! ids      count x (u32 byte length, UTF-8 bytes)
//! data     count x dim f32, row-major
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::{FusionError, Vector};

pub const MAGIC: [u8; 8] = *b"CVEC1\0\0\0";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("byte {offset}: {reason}")]
    Invalid { offset: u64, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl FormatError {
    fn at(offset: usize, reason: impl Into<String>) -> Self {
        FormatError::Invalid {
            offset: offset as u64,
            reason: reason.into(),
        }
    }
}

/// A set of equally sized vectors with string ids, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorCollection {
    pub dim: usize,
    pub ids: Vec<String>,
    pub data: Vec<f32>,
}

impl VectorCollection {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ids: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn push(&mut self, id: impl Into<String>, v: &Vector) -> Result<(), FusionError> {
        if v.dim() != self.dim {
            return Err(FusionError::DimMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        self.ids.push(id.into());
        self.data.extend_from_slice(v.as_slice());
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, i: usize) -> Result<Vector, FusionError> {
        Vector::new(self.row(i).to_vec())
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

/// Serializes a collection, with an optional 8-byte format tag after the magic.
pub fn encode(coll: &VectorCollection, tag: Option<[u8; 8]>) -> Vec<u8> {
    let mut out = Vec::with_capacity(28 + coll.data.len() * 4);
    out.extend_from_slice(&MAGIC);
    if let Some(tag) = tag {
        out.extend_from_slice(&tag);
    }
    out.extend_from_slice(&(coll.dim as u32).to_le_bytes());
    out.extend_from_slice(&(coll.ids.len() as u64).to_le_bytes());
    for id in &coll.ids {
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id.as_bytes());
    }
    for v in &coll.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], FormatError> {
        if self.bytes.len() - self.pos < n {
            return Err(FormatError::at(
                self.bytes.len(),
                format!("truncated while reading {what} (need {n} bytes at {})", self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Parses a collection. When `tag` is given, the tag field must be present
/// and match.
pub fn decode(bytes: &[u8], tag: Option<[u8; 8]>) -> Result<VectorCollection, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(FormatError::at(0, "bad magic, not a CVEC1 file"));
    }
    if let Some(expected) = tag {
        if r.take(8, "format tag")? != expected {
            return Err(FormatError::at(8, "unexpected format tag"));
        }
    }
    let dim_at = r.pos;
    let dim = r.u32("dim")? as usize;
    if dim == 0 {
        return Err(FormatError::at(dim_at, "dim must be positive"));
    }
    let count_at = r.pos;
    let count = r.u64("count")?;
    // each id needs at least its 4-byte length prefix
    if count > (bytes.len() as u64) / 4 {
        return Err(FormatError::at(count_at, format!("count {count} exceeds file size")));
    }
    let count = count as usize;
    let mut ids = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.u32("id length")? as usize;
        let at = r.pos;
        let raw = r.take(len, "id bytes")?;
        let id = std::str::from_utf8(raw)
            .map_err(|_| FormatError::at(at, "id is not valid UTF-8"))?;
        ids.push(id.to_string());
    }
    let floats = count
        .checked_mul(dim)
        .ok_or_else(|| FormatError::at(dim_at, "count x dim overflows"))?;
    let raw = r.take(floats * 4, "vector data")?;
    let data: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if r.pos != bytes.len() {
        return Err(FormatError::at(r.pos, "trailing bytes after vector data"));
    }
    Ok(VectorCollection { dim, ids, data })
}

pub fn write_file(path: &Path, coll: &VectorCollection, tag: Option<[u8; 8]>) -> io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(coll, tag))?;
    f.sync_all()
}

pub fn read_file(path: &Path, tag: Option<[u8; 8]>) -> Result<VectorCollection, FormatError> {
    decode(&fs::read(path)?, tag)
}
