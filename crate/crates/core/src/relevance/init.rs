//! Shapley values at the top of the network, used to seed propagation.

use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Matrix, Network};
use crate::shapley::{approx_shapley, exact_game, sample_permutations, NeuronView};

/// Largest input count accepted by the whole-network slow path.
pub const INPUT_SHAPLEY_MAX: usize = 12;

/// Monte-Carlo Shapley values of the head's inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxInit {
    pub relevance: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Class probability with every activation present.
    pub full: f64,
    /// Class probability with every activation masked.
    pub empty: f64,
}

fn class_prob(logits: &[f64], class: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logits.iter().map(|l| (l - max).exp()).sum();
    (logits[class] - max).exp() / total
}

/// Head layer and the activations feeding it for one input.
fn head_inputs(net: &Network, input: &[f64]) -> Result<(DenseLayer, Vec<f64>)> {
    let layers = net.layers();
    let head = layers.last().expect("non-empty").clone();
    let hidden = if layers.len() == 1 {
        if input.len() != net.input_dim() {
            return Err(Error::Shape(format!(
                "network takes {} inputs, got {}",
                net.input_dim(),
                input.len()
            )));
        }
        input.to_vec()
    } else {
        let trace = net.trace(&Matrix::row_vector(input))?;
        trace.layers[layers.len() - 1].input.row(0).to_vec()
    };
    Ok((head, hidden))
}

fn check_class(head: &DenseLayer, class: usize) -> Result<()> {
    if class >= head.fan_out {
        return Err(Error::InvalidArgument(format!(
            "class {class} out of range for {} outputs",
            head.fan_out
        )));
    }
    Ok(())
}

fn softmax_head(net: &Network, input: &[f64], class: usize) -> Result<(DenseLayer, Vec<f64>)> {
    let (head, hidden) = head_inputs(net, input)?;
    if head.activation != Activation::Softmax {
        return Err(Error::InvalidArgument(format!(
            "final layer is {}, expected softmax",
            head.activation
        )));
    }
    check_class(&head, class)?;
    Ok((head, hidden))
}

/// Shapley value of each head input for the game
/// `v(S) = softmax(W · x_S + b)[class]`, where `x_S` zeroes the activations
/// outside `S`. Estimated by permutation sampling.
pub fn init_relevance_softmax_mc(
    net: &Network,
    input: &[f64],
    class: usize,
    paths: usize,
    seed: u64,
) -> Result<SoftmaxInit> {
    let (head, h) = softmax_head(net, input, class)?;
    let m = head.fan_in;
    let classes = head.fan_out;
    // contrib[k] = column k of W scaled by h_k
    let contrib: Vec<Vec<f64>> = (0..m)
        .map(|k| (0..classes).map(|i| head.weight(i, k) * h[k]).collect())
        .collect();
    let empty = class_prob(&head.bias, class);
    let mut logits = vec![0.0; classes];
    let est = sample_permutations(m, paths, seed, |order, inc| {
        logits.copy_from_slice(&head.bias);
        let mut prev = empty;
        for &k in order {
            if h[k] == 0.0 {
                inc[k] = 0.0;
                continue;
            }
            for (l, c) in logits.iter_mut().zip(&contrib[k]) {
                *l += c;
            }
            let cur = class_prob(&logits, class);
            inc[k] = cur - prev;
            prev = cur;
        }
    })?;
    let full_logits: Vec<f64> = (0..classes)
        .map(|i| head.bias[i] + contrib.iter().map(|c| c[i]).sum::<f64>())
        .collect();
    Ok(SoftmaxInit {
        relevance: est.mean,
        stderr: est.stderr,
        full: class_prob(&full_logits, class),
        empty,
    })
}

/// Exact counterpart of [`init_relevance_softmax_mc`] by coalition
/// enumeration; at most 16 head inputs.
pub fn init_relevance_softmax_exact(
    net: &Network,
    input: &[f64],
    class: usize,
) -> Result<Vec<f64>> {
    let (head, h) = softmax_head(net, input, class)?;
    let m = head.fan_in;
    exact_game(m, |mask| {
        let logits: Vec<f64> = (0..head.fan_out)
            .map(|i| {
                let w = head.row(i);
                head.bias[i]
                    + (0..m)
                        .filter(|k| mask & (1 << k) != 0)
                        .map(|k| w[k] * h[k])
                        .sum::<f64>()
            })
            .collect();
        class_prob(&logits, class)
    })
}

/// Approximate Shapley values of output neuron `class` over the head's
/// inputs, for a linear or linear+ReLU output layer.
pub fn init_relevance_linear_relu(net: &Network, input: &[f64], class: usize) -> Result<Vec<f64>> {
    let (head, h) = head_inputs(net, input)?;
    if head.activation == Activation::Softmax {
        return Err(Error::InvalidArgument(
            "softmax heads need the Monte-Carlo initialization".into(),
        ));
    }
    check_class(&head, class)?;
    let nv = NeuronView::from_weights(head.row(class), &h, head.bias[class])?;
    Ok(approx_shapley(&nv).alpha)
}

fn input_game<'a>(
    net: &'a Network,
    input: &'a [f64],
    output: usize,
) -> Result<impl Fn(&[bool]) -> Result<f64> + 'a> {
    let n = net.input_dim();
    if n > INPUT_SHAPLEY_MAX {
        return Err(Error::TooManyInputs {
            n,
            max: INPUT_SHAPLEY_MAX,
        });
    }
    if input.len() != n {
        return Err(Error::Shape(format!(
            "network takes {n} inputs, got {}",
            input.len()
        )));
    }
    if output >= net.output_dim() {
        return Err(Error::InvalidArgument(format!(
            "output {output} out of range"
        )));
    }
    Ok(move |present: &[bool]| {
        let x: Vec<f64> = input
            .iter()
            .zip(present)
            .map(|(&v, &on)| if on { v } else { 0.0 })
            .collect();
        Ok(net.predict(&Matrix::row_vector(&x))?.get(0, output))
    })
}

/// Monte-Carlo Shapley values of the network inputs for one output, masking
/// absent inputs to zero. Runs a forward pass per step, so it is meant for
/// small networks where it measures how far propagated relevance is from
/// the whole-network attribution.
pub fn input_shapley_mc(
    net: &Network,
    input: &[f64],
    output: usize,
    paths: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let game = input_game(net, input, output)?;
    let n = input.len();
    let mut present = vec![false; n];
    let mut failure = None;
    let est = sample_permutations(n, paths, seed, |order, inc| {
        present.fill(false);
        let mut prev = game(&present).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            0.0
        });
        for &k in order {
            present[k] = true;
            let cur = game(&present).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            });
            inc[k] = cur - prev;
            prev = cur;
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok((est.mean, est.stderr)),
    }
}

/// Exact whole-network input Shapley values by enumeration.
pub fn input_shapley_exact(net: &Network, input: &[f64], output: usize) -> Result<Vec<f64>> {
    let game = input_game(net, input, output)?;
    let n = input.len();
    let values: Vec<f64> = (0..1usize << n)
        .map(|mask| {
            let present: Vec<bool> = (0..n).map(|k| mask & (1 << k) != 0).collect();
            game(&present)
        })
        .collect::<Result<_>>()?;
    exact_game(n, |mask| values[mask])
}
