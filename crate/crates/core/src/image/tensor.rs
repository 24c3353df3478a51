//! Raw tensor sidecar: `HF01`, then width, height, channels as little-endian
//! `u32`, then row-major little-endian `f32` samples.

use super::{ImageBuffer, Pixels, CHANNELS};
use crate::error::{Error, Result};

pub const TENSOR_MAGIC: &[u8; 4] = b"HF01";

pub fn tensor_bytes(img: &ImageBuffer) -> Result<Vec<u8>> {
    let Pixels::Normalized(data) = img.pixels() else {
        return Err(Error::Validation("tensor files hold normalized images".into()));
    };
    let mut out = Vec::with_capacity(16 + data.len() * 4);
    out.extend_from_slice(TENSOR_MAGIC);
    for v in [img.width(), img.height(), CHANNELS as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn read_tensor(bytes: &[u8]) -> Result<ImageBuffer> {
    let bad = |m: &str| Error::Validation(format!("tensor file: {m}"));
    if bytes.len() < 16 || &bytes[..4] != TENSOR_MAGIC {
        return Err(bad("missing HF01 header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let (w, h, c) = (word(0), word(1), word(2));
    if c as usize != CHANNELS {
        return Err(bad("expected 3 channels"));
    }
    let body = &bytes[16..];
    if body.len() != w as usize * h as usize * CHANNELS * 4 {
        return Err(bad("payload length does not match header"));
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    ImageBuffer::from_normalized(w, h, data)
}
