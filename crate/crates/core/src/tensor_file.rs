//! `HDTN` tensor files.
//!
//! Layout (little-endian): magic `HDTN`, `u8` version 1, `u8` dtype (0 = f32),
//! `u8` ndim (1..=4), `u32` per dimension, then the row-major payload.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"HDTN";
const VERSION: u8 = 1;
const DTYPE_F32: u8 = 0;

fn malformed(reason: impl Into<String>) -> Error {
    Error::Format {
        format: "HDTN",
        reason: reason.into(),
    }
}

pub fn to_bytes(t: &Tensor<f32>) -> Result<Vec<u8>> {
    if !(1..=4).contains(&t.ndim()) {
        return Err(malformed(format!("rank {} outside 1..=4", t.ndim())));
    }
    let mut out = Vec::with_capacity(7 + 4 * t.ndim() + 4 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, DTYPE_F32, t.ndim() as u8]);
    for &d in t.shape() {
        let d = u32::try_from(d).map_err(|_| malformed(format!("dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<Tensor<f32>> {
    let header = bytes.get(..7).ok_or_else(|| malformed("truncated header"))?;
    if &header[..4] != MAGIC {
        return Err(malformed("bad magic"));
    }
    if header[4] != VERSION {
        return Err(malformed(format!("unsupported version {}", header[4])));
    }
    if header[5] != DTYPE_F32 {
        return Err(malformed(format!("unsupported dtype {}", header[5])));
    }
    let ndim = header[6] as usize;
    if !(1..=4).contains(&ndim) {
        return Err(malformed(format!("rank {ndim} outside 1..=4")));
    }
    let dims_end = 7 + 4 * ndim;
    let dims = bytes.get(7..dims_end).ok_or_else(|| malformed("truncated dimensions"))?;
    let shape: Vec<usize> = dims
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")) as usize)
        .collect();
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| malformed("element count overflows"))?;
    let payload = &bytes[dims_end..];
    if payload.len() != count * 4 {
        return Err(malformed(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            count * 4
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Tensor::from_vec(&shape, data)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor<f32>) -> Result<()> {
    std::fs::write(path, to_bytes(t)?)?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor<f32>> {
    from_bytes(&std::fs::read(path)?)
}
