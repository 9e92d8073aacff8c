//! `ATNF` dense tensor files.
//!
//! Little-endian layout: magic `ATNF`, u32 version (= 1), u32 rank, `rank` × u32
//! dims, then the row-major f32 payload.

use std::path::Path;

use crate::error::{Error, Result, TensorError};

pub const ATNF_MAGIC: &[u8; 4] = b"ATNF";
pub const ATNF_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "tensor dims {dims:?} need {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.dims.len() + 4 * self.data.len());
        out.extend_from_slice(ATNF_MAGIC);
        out.extend_from_slice(&ATNF_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, TensorError> {
        if buf.len() < 4 || &buf[..4] != ATNF_MAGIC {
            return Err(TensorError::NotATensorFile);
        }
        let word = |at: usize| -> Result<u32, TensorError> {
            buf.get(at..at + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or(TensorError::TruncatedHeader)
        };
        let version = word(4)?;
        if version != ATNF_VERSION {
            return Err(TensorError::UnsupportedVersion(version));
        }
        let rank = word(8)? as usize;
        let mut dims = Vec::with_capacity(rank.min(64));
        for k in 0..rank {
            dims.push(word(12 + 4 * k)? as usize);
        }
        let start = 12 + 4 * rank;
        let expected = dims
            .iter()
            .try_fold(4usize, |acc, &d| acc.checked_mul(d))
            .unwrap_or(usize::MAX);
        let found = buf.len() - start;
        if found < expected {
            return Err(TensorError::TruncatedPayload { expected, found });
        }
        if found > expected {
            return Err(TensorError::TrailingBytes(found - expected));
        }
        let data = buf[start..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { dims, data })
    }
}

pub fn save_tensor(tensor: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, tensor.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Tensor::from_bytes(&buf).map_err(|source| Error::Tensor {
        path: path.to_path_buf(),
        source,
    })
}
