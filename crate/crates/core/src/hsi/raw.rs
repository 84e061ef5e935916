//! Minimal little-endian cube container.
//!
//! Layout: 4 magic bytes `HSIC`, then `H`, `W`, `L` as `u32`, then `H·W·L`
//! `f32` samples band-sequential. Values are stored in single precision, so a
//! cube round-trips bitwise whenever its samples are representable as `f32`
//! (anything read from ENVI or from this container is).

use std::fs;
use std::path::Path;

use crate::cube::HsiCube;
use crate::error::{Error, Result};

pub const RAW_MAGIC: [u8; 4] = *b"HSIC";
pub const RAW_HEADER_LEN: usize = 16;

pub fn encode_raw(cube: &HsiCube) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + cube.data().len() * 4);
    out.extend_from_slice(&RAW_MAGIC);
    for dim in [cube.height(), cube.width(), cube.bands()] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for &v in cube.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_raw(bytes: &[u8], path: &Path) -> Result<HsiCube> {
    if bytes.len() < RAW_HEADER_LEN {
        return Err(Error::format(path, "file shorter than the 16-byte header"));
    }
    if bytes[..4] != RAW_MAGIC {
        return Err(Error::format(path, format!("bad magic {:?}, expected \"HSIC\"", &bytes[..4])));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (h, w, l) = (dim(0), dim(1), dim(2));
    let n = h
        .checked_mul(w)
        .and_then(|v| v.checked_mul(l))
        .ok_or_else(|| Error::format(path, "dimensions overflow"))?;
    let payload = &bytes[RAW_HEADER_LEN..];
    if payload.len() != n * 4 {
        return Err(Error::format(
            path,
            format!("payload is {} bytes, {h}x{w}x{l} needs {}", payload.len(), n * 4),
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    HsiCube::new(h, w, l, data).map_err(|e| Error::format(path, e.to_string()))
}

pub fn save_raw(cube: &HsiCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_raw(cube)).map_err(|e| Error::io(path, e))
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<HsiCube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw(&bytes, path)
}

/// Writes `cube` to `path` and reads it back.
pub fn save_load_raw(cube: &HsiCube, path: impl AsRef<Path>) -> Result<HsiCube> {
    save_raw(cube, &path)?;
    load_raw(path)
}
