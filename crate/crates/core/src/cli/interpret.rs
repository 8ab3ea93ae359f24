use std::path::PathBuf;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{load_mnist, Dataset, Split};
use crate::error::{Error, Result};
use crate::nn::{load_checkpoint, Network};
use crate::relevance::{
    sensitivity_heatmaps, shapley_heatmaps, write_heatmap_pair, HeatmapPair, ShapleyHeatmapConfig,
};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributionMethod {
    /// Shapley-initialized relevance propagation.
    Shapley,
    /// Input gradient of the class output.
    Sensitivity,
}

impl AttributionMethod {
    pub fn file_prefix(self) -> &'static str {
        match self {
            AttributionMethod::Shapley => "heatmap",
            AttributionMethod::Sensitivity => "sensitivity",
        }
    }
}

/// Which images a class heatmap averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageSelection {
    /// One seeded pool of images, the same for every class.
    Shared,
    /// Images labelled with the class being explained.
    SameClass,
}

#[derive(Debug, Clone)]
pub struct InterpretOptions {
    pub checkpoint: PathBuf,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub split: Split,
    pub classes: Vec<usize>,
    pub mc_paths: usize,
    pub n_images: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub method: AttributionMethod,
    pub selection: ImageSelection,
}

/// `n` images of `ds` (all of them if fewer) picked by a seeded shuffle.
pub fn shared_images(ds: &Dataset, n: usize, seed: u64) -> Dataset {
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut rng::seeded(seed));
    idx.truncate(n);
    ds.select(&idx)
}

/// Up to `n` images of `ds` labelled `class`, picked by a seeded shuffle.
pub fn class_images(ds: &Dataset, class: usize, n: usize, seed: u64) -> Result<Dataset> {
    let mut idx = ds.indices_of(class);
    if idx.is_empty() {
        return Err(Error::Data(format!("no images of class {class}")));
    }
    idx.shuffle(&mut rng::seeded(rng::derive_seed(seed, class as u64)));
    idx.truncate(n);
    Ok(ds.select(&idx))
}

/// Per-class heatmaps of `net` over images of that class.
pub fn interpret_network(
    net: &Network,
    ds: &Dataset,
    opts: &InterpretOptions,
) -> Result<Vec<HeatmapPair>> {
    if opts.n_images == 0 {
        return Err(Error::InvalidArgument("n_images must be at least 1".into()));
    }
    let cfg = ShapleyHeatmapConfig {
        paths: opts.mc_paths,
        epsilon: opts.epsilon,
        seed: opts.seed,
    };
    let pool = match opts.selection {
        ImageSelection::Shared => Some(shared_images(ds, opts.n_images, opts.seed)),
        ImageSelection::SameClass => None,
    };
    opts.classes
        .iter()
        .map(|&class| {
            let own;
            let imgs = match &pool {
                Some(p) => p,
                None => {
                    own = class_images(ds, class, opts.n_images, opts.seed)?;
                    &own
                }
            };
            match opts.method {
                AttributionMethod::Shapley => {
                    let c = ShapleyHeatmapConfig {
                        seed: rng::derive_seed(cfg.seed, class as u64),
                        ..cfg
                    };
                    shapley_heatmaps(net, &imgs.images, class, ds.height, ds.width, &c)
                }
                AttributionMethod::Sensitivity => {
                    sensitivity_heatmaps(net, &imgs.images, class, ds.height, ds.width)
                }
            }
        })
        .collect()
}

/// Loads a checkpoint and the chosen split, then writes one heatmap pair
/// per class into `out_dir`.
pub fn cmd_interpret(opts: &InterpretOptions) -> Result<Vec<HeatmapPair>> {
    let net = load_checkpoint(&opts.checkpoint)?;
    let ds = load_mnist(&opts.data_dir, opts.split)?;
    if net.input_dim() != ds.images.cols() {
        return Err(Error::Config(format!(
            "checkpoint takes {} inputs but images have {} pixels",
            net.input_dim(),
            ds.images.cols()
        )));
    }
    if let Some(c) = opts.classes.iter().find(|&&c| c >= net.output_dim()) {
        return Err(Error::Config(format!("class {c} out of range")));
    }
    let pairs = interpret_network(&net, &ds, opts)?;
    for pair in &pairs {
        write_heatmap_pair(&opts.out_dir, opts.method.file_prefix(), pair)?;
    }
    Ok(pairs)
}
