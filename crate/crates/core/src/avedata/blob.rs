//! `AVET` tensor blobs: a 4-byte magic, a little-endian `u32` rank, `rank`
//! little-endian `u32` dims and a row-major little-endian `f32` payload.

use std::fs;
use std::path::Path;

use super::DataError;

pub const MAGIC: &[u8; 4] = b"AVET";

#[derive(Debug, Clone, PartialEq)]
pub struct TensorBlob {
    pub dims: Vec<u32>,
    pub data: Vec<f32>,
}

impl TensorBlob {
    pub fn new(dims: Vec<u32>, data: Vec<f32>) -> Self {
        debug_assert_eq!(dims.iter().map(|&d| d as usize).product::<usize>(), data.len());
        TensorBlob { dims, data }
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.dims.iter().map(|&d| d as usize).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.dims.len() + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses a blob, returning a human readable reason on malformed input.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < 8 {
            return Err(format!("truncated header ({} bytes)", bytes.len()));
        }
        if &bytes[..4] != MAGIC {
            return Err(format!("bad magic {:?}", &bytes[..4]));
        }
        let rank = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let header_len = 8 + 4 * rank;
        if bytes.len() < header_len {
            return Err(format!("rank {rank} but only {} dim bytes", bytes.len() - 8));
        }
        let dims: Vec<u32> = bytes[8..header_len]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .ok_or_else(|| format!("dims {dims:?} overflow"))?;
        let payload = &bytes[header_len..];
        if payload.len() != 4 * count {
            return Err(format!(
                "rank {rank} dims {dims:?} need {} payload bytes, found {}",
                4 * count,
                payload.len()
            ));
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(TensorBlob { dims, data })
    }

    pub fn read(path: &Path) -> Result<Self, DataError> {
        let bytes = fs::read(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes).map_err(|reason| DataError::BlobHeader {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), DataError> {
        fs::write(path, self.to_bytes()).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
