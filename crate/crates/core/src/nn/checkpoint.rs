//! Portable network checkpoint.
//!
//! All integers and floats are little-endian:
//!
//! ```text
//! magic        4 bytes  "SHPG"
//! version      u32      1
//! layer_count  u32
//! per layer:
//!   fan_in     u32
//!   fan_out    u32
//!   activation u8       0 identity, 1 relu, 2 sa, 3 shaplu, 4 softmax
//!   weights    f64 x (fan_out * fan_in), row-major [fan_out x fan_in]
//!   bias       f64 x fan_out
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::layer::{Activation, DenseLayer};
use super::network::Network;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SHPG";
pub const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(net: &Network, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(net.layers().len() as u32).to_le_bytes())?;
    for layer in net.layers() {
        w.write_all(&(layer.fan_in as u32).to_le_bytes())?;
        w.write_all(&(layer.fan_out as u32).to_le_bytes())?;
        w.write_all(&[layer.activation.tag()])?;
        for v in layer.weights.iter().chain(&layer.bias) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Checkpoint(format!(
                "truncated while reading {what} at byte {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Checkpoint("size overflow".into()))?,
            what,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Network> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut c = Cursor { buf: &buf, pos: 0 };
    if c.take(4, "magic")? != MAGIC {
        return Err(Error::Checkpoint("bad magic, not a SHPG checkpoint".into()));
    }
    let version = c.u32("version")?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = c.u32("layer count")? as usize;
    let mut layers = Vec::with_capacity(count.min(1024));
    for i in 0..count {
        let fan_in = c.u32("fan_in")? as usize;
        let fan_out = c.u32("fan_out")? as usize;
        let tag = c.take(1, "activation")?[0];
        let activation = Activation::from_tag(tag)
            .ok_or_else(|| Error::Checkpoint(format!("layer {i}: unknown activation tag {tag}")))?;
        let weights = c.f64s(fan_in * fan_out, "weights")?;
        let bias = c.f64s(fan_out, "bias")?;
        layers.push(
            DenseLayer::new(fan_in, fan_out, weights, bias, activation)
                .map_err(|e| Error::Checkpoint(format!("layer {i}: {e}")))?,
        );
    }
    if c.pos != buf.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes",
            buf.len() - c.pos
        )));
    }
    Network::new(layers).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    write_checkpoint(net, &mut bytes)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network> {
    read_checkpoint(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::InitScheme;

    #[test]
    fn golden_header() {
        let layer = DenseLayer::new(2, 1, vec![1.0, -2.0], vec![0.5], Activation::Sa).unwrap();
        let net = Network::new(vec![layer]).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&net, &mut bytes).unwrap();
        let mut want = b"SHPG".to_vec();
        want.extend([1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 2]);
        for v in [1.0f64, -2.0, 0.5] {
            want.extend(v.to_le_bytes());
        }
        assert_eq!(bytes, want);
    }

    #[test]
    fn round_trip_and_errors() {
        let mut net = Network::mlp(&[5, 4, 3], Activation::ShapLu, Activation::Softmax).unwrap();
        net.init_params(InitScheme::GlorotUniform, 3);
        let mut bytes = Vec::new();
        write_checkpoint(&net, &mut bytes).unwrap();
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(back.layers(), net.layers());

        assert!(read_checkpoint(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_checkpoint(bad.as_slice()).is_err());
        let mut bad = bytes.clone();
        bad[20] = 9; // first activation tag
        assert!(read_checkpoint(bad.as_slice()).is_err());
        bytes.push(0);
        assert!(read_checkpoint(bytes.as_slice()).is_err());
    }
}
