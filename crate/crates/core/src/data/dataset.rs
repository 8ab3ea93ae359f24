use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::idx::{load_idx_images, load_idx_labels};
use crate::error::{Error, Result};
use crate::nn::{Batch, Matrix};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }
}

/// Images flattened row-major, one per row of `images`, scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Matrix,
    pub labels: Vec<usize>,
    pub height: usize,
    pub width: usize,
    pub split: Split,
}

impl Dataset {
    pub fn new(
        images: Matrix,
        labels: Vec<usize>,
        height: usize,
        width: usize,
        split: Split,
    ) -> Result<Self> {
        if images.rows() != labels.len() {
            return Err(Error::Data(format!(
                "{} images but {} labels",
                images.rows(),
                labels.len()
            )));
        }
        if images.cols() != height * width {
            return Err(Error::Data(format!(
                "images have {} pixels, expected {height}x{width}",
                images.cols()
            )));
        }
        Ok(Self {
            images,
            labels,
            height,
            width,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[f64] {
        self.images.row(i)
    }

    /// Dataset made of the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let cols = self.images.cols();
        let mut data = Vec::with_capacity(indices.len() * cols);
        for &i in indices {
            data.extend_from_slice(self.images.row(i));
        }
        Self {
            images: Matrix::from_vec(indices.len(), cols, data).expect("consistent shape"),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            height: self.height,
            width: self.width,
            split: self.split,
        }
    }

    pub fn batch(&self, indices: &[usize]) -> Batch {
        let sub = self.select(indices);
        Batch {
            inputs: sub.images,
            labels: sub.labels,
        }
    }

    /// Indices of every sample with label `class`.
    pub fn indices_of(&self, class: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == class)
            .collect()
    }
}

const IMAGE_NAMES: [&str; 2] = ["{p}-images-idx3-ubyte", "{p}-images.idx3-ubyte"];
const LABEL_NAMES: [&str; 2] = ["{p}-labels-idx1-ubyte", "{p}-labels.idx1-ubyte"];

fn discover(dir: &Path, patterns: &[&str], prefix: &str) -> Result<PathBuf> {
    patterns
        .iter()
        .map(|p| dir.join(p.replace("{p}", prefix)))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::Data(format!(
                "no {} file in {}",
                patterns[0].replace("{p}", prefix),
                dir.display()
            ))
        })
}

/// Loads one MNIST split from `dir`, accepting both the `-idx3-ubyte` and
/// `.idx3-ubyte` spellings of the standard file names.
pub fn load_mnist(dir: impl AsRef<Path>, split: Split) -> Result<Dataset> {
    let dir = dir.as_ref();
    let images = load_idx_images(discover(dir, &IMAGE_NAMES, split.prefix())?)?;
    let labels = load_idx_labels(discover(dir, &LABEL_NAMES, split.prefix())?)?;
    if images.count != labels.len() {
        return Err(Error::Data(format!(
            "{} images but {} labels in {}",
            images.count,
            labels.len(),
            dir.display()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 9) {
        return Err(Error::Data(format!("label {bad} outside 0..=9")));
    }
    let pixels = images.rows * images.cols;
    Dataset::new(
        Matrix::from_vec(images.count, pixels, images.scaled())?,
        labels.into_iter().map(usize::from).collect(),
        images.rows,
        images.cols,
        split,
    )
}

/// `n` distinct samples drawn with a seeded shuffle.
pub fn take_subset(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if n > ds.len() {
        return Err(Error::Data(format!(
            "asked for {n} samples from a dataset of {}",
            ds.len()
        )));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut rng::seeded(seed));
    idx.truncate(n);
    Ok(ds.select(&idx))
}

/// Seeded mini-batch schedule over a dataset.
#[derive(Debug, Clone)]
pub struct Batcher {
    pub batch_size: usize,
    pub seed: u64,
    pub reshuffle_each_epoch: bool,
}

impl Batcher {
    pub fn new(batch_size: usize, seed: u64, reshuffle_each_epoch: bool) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        Ok(Self {
            batch_size,
            seed,
            reshuffle_each_epoch,
        })
    }

    /// Sample order for `epoch`: a permutation of `0..n`.
    pub fn order(&self, n: usize, epoch: usize) -> Vec<usize> {
        let stream = if self.reshuffle_each_epoch {
            epoch as u64
        } else {
            0
        };
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng::seeded(rng::derive_seed(self.seed, stream)));
        idx
    }

    /// Index groups of one epoch; the last one may be short.
    pub fn epoch_indices(&self, n: usize, epoch: usize) -> Vec<Vec<usize>> {
        self.order(n, epoch)
            .chunks(self.batch_size)
            .map(<[usize]>::to_vec)
            .collect()
    }

    pub fn epoch<'a>(&self, ds: &'a Dataset, epoch: usize) -> impl Iterator<Item = Batch> + 'a {
        self.epoch_indices(ds.len(), epoch)
            .into_iter()
            .map(move |idx| ds.batch(&idx))
    }
}

/// Points uniform in `[-1, 1]²` labelled by the side of the line
/// `x + 0.5 y = 0.1`, so the classes are exactly linearly separable.
pub fn linearly_separable(n: usize, seed: u64) -> Dataset {
    let mut g = rng::seeded(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = g.gen_range(-1.0..1.0);
        let y: f64 = g.gen_range(-1.0..1.0);
        data.push(x);
        data.push(y);
        labels.push(usize::from(x + 0.5 * y > 0.1));
    }
    Dataset {
        images: Matrix::from_vec(n, 2, data).expect("consistent"),
        labels,
        height: 1,
        width: 2,
        split: Split::Train,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let images = Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        Dataset::new(images, (0..n).map(|i| i % 10).collect(), 1, 1, Split::Train).unwrap()
    }

    #[test]
    fn subset_is_deterministic_and_distinct() {
        let ds = toy(600);
        let a = take_subset(&ds, 100, 5).unwrap();
        let b = take_subset(&ds, 100, 5).unwrap();
        assert_eq!(a, b);
        let mut seen: Vec<f64> = a.images.as_slice().to_vec();
        seen.sort_by(f64::total_cmp);
        seen.dedup();
        assert_eq!(seen.len(), 100);
        assert_ne!(a, take_subset(&ds, 100, 6).unwrap());
        assert!(take_subset(&ds, 601, 0).is_err());
    }

    #[test]
    fn batches_partition_each_epoch() {
        let b = Batcher::new(10, 1, true).unwrap();
        let e0 = b.epoch_indices(1000, 0);
        assert_eq!(e0.len(), 100);
        let mut all: Vec<usize> = e0.concat();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        let e1 = b.epoch_indices(1000, 1);
        assert_ne!(e0, e1);
        let mut all1 = e1.concat();
        all1.sort_unstable();
        assert_eq!(all1, all);
        let fixed = Batcher::new(10, 1, false).unwrap();
        assert_eq!(fixed.epoch_indices(50, 0), fixed.epoch_indices(50, 3));
        assert!(Batcher::new(0, 1, true).is_err());
    }

    #[test]
    fn toy_set_is_separable() {
        let ds = linearly_separable(200, 3);
        assert_eq!(ds.len(), 200);
        for i in 0..ds.len() {
            let p = ds.image(i);
            assert_eq!(ds.labels[i], usize::from(p[0] + 0.5 * p[1] > 0.1));
        }
        assert!(ds.indices_of(0).len() > 50 && ds.indices_of(1).len() > 50);
    }
}
