use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::init::{init_relevance_linear_relu, init_relevance_softmax_mc};
use super::lrp::lrp_network;
use crate::data::{to_gray, write_csv, write_pgm};
use crate::error::{Error, Result};
use crate::nn::{Activation, GradSeed, Matrix, Network};
use crate::rng;

/// Pixels darker than this are left out of the per-unit-intensity average.
pub const X_FLOOR: f64 = 1e-8;

/// Mean positive and negative attribution per pixel for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapPair {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
    pub height: usize,
    pub width: usize,
    pub class_id: usize,
    pub n_images: usize,
    /// Images that contributed to each pixel.
    pub counts: Vec<usize>,
}

impl HeatmapPair {
    pub fn max_value(&self) -> f64 {
        self.positive
            .iter()
            .chain(&self.negative)
            .copied()
            .fold(0.0, f64::max)
    }

    /// Mean of `image` over the central `inner x inner` square divided by
    /// its mean over a frame `border` pixels wide.
    pub fn centre_border_ratio(
        image: &[f64],
        height: usize,
        width: usize,
        inner: usize,
        border: usize,
    ) -> f64 {
        let (top, left) = ((height - inner) / 2, (width - inner) / 2);
        let (mut c_sum, mut c_n, mut b_sum, mut b_n) = (0.0, 0usize, 0.0, 0usize);
        for r in 0..height {
            for c in 0..width {
                let v = image[r * width + c];
                if (top..top + inner).contains(&r) && (left..left + inner).contains(&c) {
                    c_sum += v;
                    c_n += 1;
                }
                if r < border || c < border || r >= height - border || c >= width - border {
                    b_sum += v;
                    b_n += 1;
                }
            }
        }
        (c_sum / c_n as f64) / (b_sum / b_n as f64)
    }
}

fn check_shape(len: usize, height: usize, width: usize) -> Result<()> {
    if len != height * width {
        return Err(Error::Shape(format!(
            "{len} values do not form a {height}x{width} image"
        )));
    }
    Ok(())
}

/// Averages `max(α/x, 0)` and `−min(α/x, 0)` per pixel over images, leaving
/// out pixels with `|x| < X_FLOOR`.
pub fn aggregate_heatmaps<R, X>(
    relevance: &[R],
    inputs: &[X],
    class_id: usize,
    height: usize,
    width: usize,
) -> Result<HeatmapPair>
where
    R: AsRef<[f64]>,
    X: AsRef<[f64]>,
{
    if relevance.is_empty() {
        return Err(Error::InvalidArgument("no images to aggregate".into()));
    }
    if relevance.len() != inputs.len() {
        return Err(Error::Shape(format!(
            "{} relevance maps for {} images",
            relevance.len(),
            inputs.len()
        )));
    }
    let n = height * width;
    let mut positive = vec![0.0; n];
    let mut negative = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for (r, x) in relevance.iter().zip(inputs) {
        let (r, x) = (r.as_ref(), x.as_ref());
        check_shape(r.len(), height, width)?;
        check_shape(x.len(), height, width)?;
        for k in 0..n {
            if x[k].abs() < X_FLOOR {
                continue;
            }
            let v = r[k] / x[k];
            positive[k] += v.max(0.0);
            negative[k] += (-v).max(0.0);
            counts[k] += 1;
        }
    }
    for k in 0..n {
        if counts[k] > 0 {
            positive[k] /= counts[k] as f64;
            negative[k] /= counts[k] as f64;
        }
    }
    Ok(HeatmapPair {
        positive,
        negative,
        height,
        width,
        class_id,
        n_images: relevance.len(),
        counts,
    })
}

/// Averages the positive and negative parts of the input gradient of
/// output `class_id` (a probability for softmax networks) over the rows of
/// `inputs`.
pub fn sensitivity_heatmaps(
    net: &Network,
    inputs: &Matrix,
    class_id: usize,
    height: usize,
    width: usize,
) -> Result<HeatmapPair> {
    if inputs.rows() == 0 {
        return Err(Error::InvalidArgument("no images to aggregate".into()));
    }
    check_shape(inputs.cols(), height, width)?;
    if class_id >= net.output_dim() {
        return Err(Error::InvalidArgument(format!(
            "class {class_id} out of range"
        )));
    }
    let trace = net.trace(inputs)?;
    let mut seed = Matrix::zeros(inputs.rows(), net.output_dim());
    for b in 0..inputs.rows() {
        seed.row_mut(b)[class_id] = 1.0;
    }
    let grads = net.backward_trace(&trace, &seed, GradSeed::Output, true)?;
    let g = grads.input.expect("input gradient requested");
    let n = height * width;
    let mut positive = vec![0.0; n];
    let mut negative = vec![0.0; n];
    for row in g.iter_rows() {
        for k in 0..n {
            positive[k] += row[k].max(0.0);
            negative[k] += (-row[k]).max(0.0);
        }
    }
    let count = inputs.rows();
    for k in 0..n {
        positive[k] /= count as f64;
        negative[k] /= count as f64;
    }
    Ok(HeatmapPair {
        positive,
        negative,
        height,
        width,
        class_id,
        n_images: count,
        counts: vec![count; n],
    })
}

/// Settings of a relevance heatmap run.
#[derive(Debug, Clone, Copy)]
pub struct ShapleyHeatmapConfig {
    pub paths: usize,
    pub epsilon: f64,
    pub seed: u64,
}

/// Input relevance of `class_id` for every row of `inputs`, followed by
/// [`aggregate_heatmaps`]. Softmax heads are initialized by Monte Carlo
/// (image `i` uses the stream derived from `(seed, i)`), other heads by the
/// analytic approximation.
pub fn shapley_heatmaps(
    net: &Network,
    inputs: &Matrix,
    class_id: usize,
    height: usize,
    width: usize,
    cfg: &ShapleyHeatmapConfig,
) -> Result<HeatmapPair> {
    let softmax = net.layers().last().expect("non-empty").activation == Activation::Softmax;
    let maps: Vec<Vec<f64>> = (0..inputs.rows())
        .into_par_iter()
        .map(|i| {
            let x = inputs.row(i);
            let init = if softmax {
                init_relevance_softmax_mc(
                    net,
                    x,
                    class_id,
                    cfg.paths,
                    rng::derive_seed(cfg.seed, i as u64),
                )?
                .relevance
            } else {
                init_relevance_linear_relu(net, x, class_id)?
            };
            Ok(lrp_network(net, x, &init, cfg.epsilon)?
                .per_layer
                .swap_remove(0))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<&[f64]> = inputs.iter_rows().collect();
    aggregate_heatmaps(&maps, &rows, class_id, height, width)
}

#[derive(Serialize)]
struct PixelRow {
    row: usize,
    col: usize,
    positive: f64,
    negative: f64,
    count: usize,
}

/// Writes `<prefix>_<class>_pos.pgm`, `<prefix>_<class>_neg.pgm` (both scaled
/// by the largest value of the pair) and the raw values as
/// `<prefix>_<class>.csv`. Returns the three paths.
pub fn write_heatmap_pair(
    dir: impl AsRef<Path>,
    prefix: &str,
    pair: &HeatmapPair,
) -> Result<[PathBuf; 3]> {
    let dir = dir.as_ref();
    let max = pair.max_value();
    let base = format!("{prefix}_{}", pair.class_id);
    let pos = dir.join(format!("{base}_pos.pgm"));
    let neg = dir.join(format!("{base}_neg.pgm"));
    let csv = dir.join(format!("{base}.csv"));
    write_pgm(&pos, pair.width, pair.height, &to_gray(&pair.positive, max))?;
    write_pgm(&neg, pair.width, pair.height, &to_gray(&pair.negative, max))?;
    let rows: Vec<PixelRow> = (0..pair.positive.len())
        .map(|k| PixelRow {
            row: k / pair.width,
            col: k % pair.width,
            positive: pair.positive[k],
            negative: pair.negative[k],
            count: pair.counts[k],
        })
        .collect();
    write_csv(&csv, &rows)?;
    Ok([pos, neg, csv])
}
