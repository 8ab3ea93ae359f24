use rand::seq::SliceRandom;

use super::neuron::{BiasMode, NeuronView};
use super::{Method, ShapleyResult};
use crate::error::{Error, Result};
use crate::rng;

/// Per-player mean and standard error of sampled marginal contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Draws `paths` uniform orderings of `n` players and averages the marginal
/// contributions reported by `walk`.
///
/// `walk` receives one ordering and writes the increment of every player into
/// the second slice (indexed by player, not by position). Path `i` shuffles
/// with its own generator seeded from `(seed, i)`, so results do not depend
/// on how paths are scheduled.
pub fn sample_permutations<F>(
    n: usize,
    paths: usize,
    seed: u64,
    mut walk: F,
) -> Result<PermutationEstimate>
where
    F: FnMut(&[usize], &mut [f64]),
{
    if paths < 2 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least 2 paths, got {paths}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut inc = vec![0.0; n];
    // Welford accumulators
    let mut mean = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    for path in 0..paths {
        let mut g = rng::seeded(rng::derive_seed(seed, path as u64));
        order.sort_unstable();
        order.shuffle(&mut g);
        walk(&order, &mut inc);
        let count = (path + 1) as f64;
        for k in 0..n {
            let d = inc[k] - mean[k];
            mean[k] += d / count;
            m2[k] += d * (inc[k] - mean[k]);
        }
    }
    let p = paths as f64;
    let stderr = m2
        .iter()
        .map(|&s| (s / (p - 1.0)).max(0.0).sqrt() / p.sqrt())
        .collect();
    Ok(PermutationEstimate { mean, stderr })
}

/// Monte-Carlo Shapley values of a ReLU neuron by permutation sampling.
pub fn mc_shapley(
    nv: &NeuronView,
    mode: BiasMode,
    paths: usize,
    seed: u64,
) -> Result<ShapleyResult> {
    let n = nv.n();
    let products = nv.products();
    let bias = nv.bias();
    let est = sample_permutations(n, paths, seed, |order, inc| {
        let mut sum = 0.0;
        let mut prev = mode.coalition_bias(bias, 0, n).max(0.0);
        for (pos, &k) in order.iter().enumerate() {
            sum += products[k];
            let v = (sum + mode.coalition_bias(bias, pos + 1, n)).max(0.0);
            inc[k] = v - prev;
            prev = v;
        }
    })?;
    Ok(ShapleyResult {
        alpha: est.mean,
        method: Method::MonteCarlo,
        stderr: Some(est.stderr),
        baseline: mode.baseline(bias),
    })
}
