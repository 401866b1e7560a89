//! Binary dump of a feature-map stack.
//!
//! Layout, all little-endian: `u32 width`, `u32 height`, `u32 channels`,
//! then per channel `u32 name_len` and the UTF-8 name, then every channel's
//! row-major data as `f32`, in the same order as the names.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rcfuse_core::features::{FeatureMapStack, Plane};

use crate::error::{Error, Result};

pub fn encode_planes(stack: &FeatureMapStack) -> Vec<u8> {
    let mut buf = Vec::new();
    let n = stack.channels().len();
    for v in [stack.width(), stack.height(), n] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for c in stack.channels() {
        buf.extend_from_slice(&(c.name.len() as u32).to_le_bytes());
        buf.extend_from_slice(c.name.as_bytes());
    }
    for c in stack.channels() {
        for v in c.plane.data() {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    buf
}

pub fn write_planes(stack: &FeatureMapStack, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode_planes(stack))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Format("truncated plane file".into()));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

fn take_u32(bytes: &mut &[u8]) -> Result<usize> {
    let b = take(bytes, 4)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
}

/// Inverse of [`encode_planes`]; values come back rounded to `f32`.
pub fn decode_planes(mut bytes: &[u8], stride: usize) -> Result<FeatureMapStack> {
    let b = &mut bytes;
    let (width, height, n) = (take_u32(b)?, take_u32(b)?, take_u32(b)?);
    let mut names = Vec::with_capacity(n);
    for _ in 0..n {
        let len = take_u32(b)?;
        let name = std::str::from_utf8(take(b, len)?).map_err(|e| Error::Format(e.to_string()))?;
        names.push(name.to_owned());
    }
    let mut stack = FeatureMapStack::new(width, height, stride);
    for name in names {
        let raw = take(b, width * height * 4)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect();
        stack.insert(name, Plane::from_vec(width, height, data)?)?;
    }
    if !b.is_empty() {
        return Err(Error::Format("trailing bytes after plane data".into()));
    }
    Ok(stack)
}

pub fn read_planes(path: &Path, stride: usize) -> Result<FeatureMapStack> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_planes(&bytes, stride)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let mut stack = FeatureMapStack::new(3, 2, 4);
        stack
            .insert("a", Plane::from_vec(3, 2, vec![0.0, 0.5, 1.0, -1.0, 2.0, 0.25]).unwrap())
            .unwrap();
        stack.insert("bb", Plane::filled(3, 2, 0.125)).unwrap();
        let bytes = encode_planes(&stack);
        assert_eq!(&bytes[..12], &[3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&bytes[12..17], &[1, 0, 0, 0, b'a']);
        assert_eq!(bytes.len(), 12 + 5 + 6 + 2 * 6 * 4);
        assert_eq!(decode_planes(&bytes, 4).unwrap(), stack);
        assert!(decode_planes(&bytes[..bytes.len() - 1], 4).is_err());
    }
}
