//! Big-endian IDX containers as used by the MNIST distribution.
//!
//! Images: magic `0x00000803`, then `count`, `rows`, `cols` as `u32`, then
//! `count * rows * cols` bytes. Labels: magic `0x00000801`, `count`, then
//! `count` bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }

    /// Pixels scaled to `[0, 1]` by dividing by 255.
    pub fn scaled(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| f64::from(p) / 255.0).collect()
    }
}

struct Reader<'a> {
    path: &'a Path,
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Idx {
            path: self.path.to_path_buf(),
            offset: self.pos as u64,
            message: message.into(),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        if self.buf.len() - self.pos < 4 {
            return Err(self.err(format!("truncated while reading {what}")));
        }
        let v = u32::from_be_bytes(self.buf[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn bytes(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        let available = self.buf.len() - self.pos;
        if available < n {
            return Err(self.err(format!(
                "truncated {what}: need {n} bytes, {available} available"
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

pub fn parse_idx_images(path: &Path, buf: &[u8]) -> Result<IdxImages> {
    let mut r = Reader { path, buf, pos: 0 };
    let magic = r.u32("magic")?;
    if magic != IMAGES_MAGIC {
        r.pos = 0;
        return Err(r.err(format!("bad image magic {magic:#010x}")));
    }
    let count = r.u32("image count")? as usize;
    let rows = r.u32("row count")? as usize;
    let cols = r.u32("column count")? as usize;
    let n = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| r.err("image dimensions overflow"))?;
    let pixels = r.bytes(n, "pixel data")?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(path: &Path, buf: &[u8]) -> Result<Vec<u8>> {
    let mut r = Reader { path, buf, pos: 0 };
    let magic = r.u32("magic")?;
    if magic != LABELS_MAGIC {
        r.pos = 0;
        return Err(r.err(format!("bad label magic {magic:#010x}")));
    }
    let count = r.u32("label count")? as usize;
    Ok(r.bytes(count, "label data")?.to_vec())
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    let path = path.as_ref();
    parse_idx_images(path, &read(path)?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    parse_idx_labels(path, &read(path)?)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Idx {
        path: PathBuf::from(path),
        offset: 0,
        message: e.to_string(),
    })
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        IMAGES_MAGIC,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.extend(v.to_be_bytes());
    }
    out.extend(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend(LABELS_MAGIC.to_be_bytes());
    out.extend((labels.len() as u32).to_be_bytes());
    out.extend(labels);
    out
}
