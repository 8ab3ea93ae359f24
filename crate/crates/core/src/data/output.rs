//! CSV and PGM emission.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str =
    "run_id,seed,activation,optimizer,lr,epoch,batch,train_loss,train_acc,val_acc";

/// One line of the per-run metrics file. Missing values are written as
/// empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub run_id: String,
    pub seed: u64,
    pub activation: String,
    pub optimizer: String,
    pub lr: f64,
    pub epoch: usize,
    /// Optimizer steps taken so far.
    pub batch: usize,
    pub train_loss: Option<f64>,
    pub train_acc: Option<f64>,
    pub val_acc: Option<f64>,
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}

/// Serializes `rows` with a header row, one file per call.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(create(path.as_ref())?));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_csv_metrics(path: impl AsRef<Path>, rows: &[MetricRow]) -> Result<()> {
    if rows.is_empty() {
        let mut f = create(path.as_ref())?;
        writeln!(f, "{METRICS_HEADER}")?;
        return Ok(());
    }
    write_csv(path, rows)
}

pub fn read_csv_metrics(path: impl AsRef<Path>) -> Result<Vec<MetricRow>> {
    read_csv(path)
}

/// Scales `values` to bytes with `round(255 · v / max)`, clamped to
/// `[0, 255]`. A non-positive `max` maps everything to 0.
pub fn to_gray(values: &[f64], max: f64) -> Vec<u8> {
    values
        .iter()
        .map(|&v| {
            if max > 0.0 && v.is_finite() {
                (255.0 * v / max).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect()
}

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(Error::Shape(format!(
            "{width}x{height} image given {} pixels",
            pixels.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

/// Binary greyscale PGM, maxval 255, rows top to bottom.
pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    let bytes = encode_pgm(width, height, pixels)?;
    create(path.as_ref())?.write_all(&bytes)?;
    Ok(())
}
