//! Central finite-difference check of [`Network`] gradients.

use rand::seq::index;

use super::layer::Activation;
use super::loss::cross_entropy;
use super::matrix::Matrix;
use super::network::{GradSeed, Network, Trace};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy)]
pub struct GradCheckConfig {
    pub tolerance: f64,
    /// Parameters sampled; every parameter is checked when the network has
    /// fewer.
    pub samples: usize,
    pub step: f64,
    /// Magnitude floor of the relative-error denominator.
    pub abs_floor: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            samples: 200,
            step: 1e-5,
            abs_floor: 1e-6,
            seed: 0,
        }
    }
}

/// `|a - n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub layer: usize,
    /// Flat index: weights first (row-major), then biases.
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
    /// The analytic gradient flows through a ShapLU backward rule.
    pub via_shaplu: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checks: Vec<ParamCheck>,
    pub skipped_kinks: usize,
    pub tolerance: f64,
    /// Largest error over parameters that are gated.
    pub max_rel_error: f64,
    /// Largest deviation over parameters reached through ShapLU layers.
    pub shaplu_max_deviation: Option<f64>,
    pub passed: bool,
}

/// Loss used by the checker: cross-entropy for a softmax head, otherwise
/// `0.5 · Σ y² / batch`.
fn probe_loss(net: &Network, trace: &Trace, labels: &[usize]) -> Result<(f64, Matrix, GradSeed)> {
    let out = trace.output();
    let last = net.layers().last().expect("non-empty").activation;
    if last == Activation::Softmax {
        let (loss, grad) = cross_entropy(out, labels)?;
        Ok((loss, grad, GradSeed::Logits))
    } else {
        let b = out.rows() as f64;
        let loss = out.as_slice().iter().map(|y| 0.5 * y * y).sum::<f64>() / b;
        let grad = Matrix::from_vec(
            out.rows(),
            out.cols(),
            out.as_slice().iter().map(|y| y / b).collect(),
        )?;
        Ok((loss, grad, GradSeed::Output))
    }
}

/// On/off pattern of every ReLU-forward neuron in the trace.
fn relu_pattern(net: &Network, trace: &Trace) -> Vec<bool> {
    net.layers()
        .iter()
        .zip(&trace.layers)
        .filter(|(layer, _)| layer.activation.is_relu_forward())
        .flat_map(|(_, t)| t.pre.as_slice().iter().map(|&s| s > 0.0))
        .collect()
}

fn set_param(net: &mut Network, layer: usize, index: usize, value: f64) {
    let l = &mut net.layers_mut()[layer];
    let nw = l.weights.len();
    if index < nw {
        l.weights[index] = value;
    } else {
        l.bias[index - nw] = value;
    }
}

fn get_param(net: &Network, layer: usize, index: usize) -> f64 {
    let l = &net.layers()[layer];
    let nw = l.weights.len();
    if index < nw {
        l.weights[index]
    } else {
        l.bias[index - nw]
    }
}

/// Compares backpropagated gradients with central differences of the probe
/// loss on a random subsample of parameters.
///
/// A parameter whose perturbation switches any ReLU neuron on or off is
/// skipped: the finite difference would straddle a kink.
///
/// Parameters in or below a ShapLU layer get a deliberately inconsistent
/// gradient, so their deviation is reported but never fails the check.
pub fn grad_check(
    net: &Network,
    inputs: &Matrix,
    labels: &[usize],
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    if cfg.step <= 0.0 || cfg.tolerance <= 0.0 {
        return Err(Error::InvalidArgument(
            "step and tolerance must be positive".into(),
        ));
    }
    let trace = net.trace(inputs)?;
    let pattern = relu_pattern(net, &trace);
    let (_, seed_grad, seed) = probe_loss(net, &trace, labels)?;
    let grads = net.backward_trace(&trace, &seed_grad, seed, false)?;

    let highest_shaplu = net
        .layers()
        .iter()
        .rposition(|l| l.activation == Activation::ShapLu);

    let sizes: Vec<usize> = net.layers().iter().map(|l| l.param_count()).collect();
    let total: usize = sizes.iter().sum();
    let mut g = rng::seeded(cfg.seed);
    let mut picks: Vec<usize> = if total <= cfg.samples {
        (0..total).collect()
    } else {
        index::sample(&mut g, total, cfg.samples).into_vec()
    };
    picks.sort_unstable();

    let mut work = net.clone();
    let mut checks = Vec::with_capacity(picks.len());
    let mut skipped = 0;
    for flat in picks {
        let (mut layer, mut index) = (0, flat);
        while index >= sizes[layer] {
            index -= sizes[layer];
            layer += 1;
        }
        let original = get_param(net, layer, index);
        let mut eval = |v: f64| -> Result<Option<f64>> {
            set_param(&mut work, layer, index, v);
            let t = work.trace(inputs)?;
            if relu_pattern(&work, &t) != pattern {
                return Ok(None);
            }
            Ok(Some(probe_loss(&work, &t, labels)?.0))
        };
        let plus = eval(original + cfg.step)?;
        let minus = eval(original - cfg.step)?;
        set_param(&mut work, layer, index, original);
        let (Some(plus), Some(minus)) = (plus, minus) else {
            skipped += 1;
            continue;
        };
        let numeric = (plus - minus) / (2.0 * cfg.step);
        let lg = &grads.layers[layer];
        let analytic = if index < lg.weights.len() {
            lg.weights[index]
        } else {
            lg.bias[index - lg.weights.len()]
        };
        checks.push(ParamCheck {
            layer,
            index,
            analytic,
            numeric,
            rel_error: relative_error(analytic, numeric, cfg.abs_floor),
            via_shaplu: highest_shaplu.is_some_and(|h| layer <= h),
        });
    }

    let gated = checks.iter().filter(|c| !c.via_shaplu);
    let max_rel_error = gated.map(|c| c.rel_error).fold(0.0, f64::max);
    let shaplu_max_deviation = highest_shaplu.map(|_| {
        checks
            .iter()
            .filter(|c| c.via_shaplu)
            .map(|c| c.rel_error)
            .fold(0.0, f64::max)
    });
    Ok(GradCheckReport {
        passed: max_rel_error <= cfg.tolerance && checks.iter().any(|c| !c.via_shaplu),
        checks,
        skipped_kinks: skipped,
        tolerance: cfg.tolerance,
        max_rel_error,
        shaplu_max_deviation,
    })
}
