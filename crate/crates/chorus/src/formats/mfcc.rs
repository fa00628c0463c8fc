//! `MFCC1 rows cols\n` followed by row-major little-endian `f32`.

use std::path::Path;

use super::bytes::put_f32;
use super::{read_bytes, write_atomic};
use crate::{Error, Result};

pub fn encode(rows: usize, cols: usize, data: &[f32]) -> Vec<u8> {
    assert_eq!(rows * cols, data.len(), "matrix shape");
    let mut out = format!("MFCC1 {rows} {cols}\n").into_bytes();
    out.reserve(data.len() * 4);
    for &v in data {
        put_f32(&mut out, v);
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let bad = |m: &str| Error::format(path, m.to_string());
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad("missing header"))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
    let mut parts = header.split(' ');
    if parts.next() != Some("MFCC1") {
        return Err(bad("missing MFCC1 magic"));
    }
    let mut dim = || -> Result<usize> {
        parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| bad("bad matrix shape"))
    };
    let (rows, cols) = (dim()?, dim()?);
    let body = &bytes[nl + 1..];
    if body.len() != rows * cols * 4 {
        return Err(bad(&format!("expected {} data bytes, found {}", rows * cols * 4, body.len())));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, data))
}

pub fn write(path: &Path, rows: usize, cols: usize, data: &[f32]) -> Result<()> {
    write_atomic(path, &encode(rows, cols, data))
}

pub fn read(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    decode(&read_bytes(path)?, path)
}
