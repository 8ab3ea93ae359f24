use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Matrix, Network, Trace};

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Relevance of every layer for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceMap {
    /// Index 0 is the network input; the last entry is where propagation
    /// started (the output layer, or the head's input for softmax networks).
    pub per_layer: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl RelevanceMap {
    pub fn input(&self) -> &[f64] {
        &self.per_layer[0]
    }

    pub fn layer_sums(&self) -> Vec<f64> {
        self.per_layer.iter().map(|r| r.iter().sum()).collect()
    }

    /// Largest `|Σ r_layer − Σ r_top| / |Σ r_top|` over layers.
    pub fn conservation_error(&self) -> f64 {
        let sums = self.layer_sums();
        let top = *sums.last().expect("at least one layer");
        let scale = top.abs().max(f64::MIN_POSITIVE);
        sums.iter()
            .map(|s| (s - top).abs() / scale)
            .fold(0.0, f64::max)
    }
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Redistributes `out_relevance` of a dense layer onto its inputs.
///
/// Output neuron `j` hands input `k` the share
/// `(w_jk x_k + b_j / n) / (s_j + ε · sign(s_j))` of its relevance, with
/// `s_j = Σ_i w_ji x_i + b_j` and `sign(0) = +1`. The rule is the same for
/// every activation that scales the pre-activation by a per-neuron factor,
/// since that factor cancels. With `ε = 0` a zero pre-activation divides by
/// zero.
pub fn lrp_layer(
    layer: &DenseLayer,
    inputs: &[f64],
    out_relevance: &[f64],
    epsilon: f64,
) -> Result<Vec<f64>> {
    if layer.activation == Activation::Softmax {
        return Err(Error::InvalidArgument(
            "relevance is not propagated through a softmax layer; initialize below it".into(),
        ));
    }
    if inputs.len() != layer.fan_in || out_relevance.len() != layer.fan_out {
        return Err(Error::Shape(format!(
            "{}x{} layer given {} inputs and {} relevances",
            layer.fan_out,
            layer.fan_in,
            inputs.len(),
            out_relevance.len()
        )));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    let n = layer.fan_in as f64;
    let mut rel = vec![0.0; layer.fan_in];
    for (j, &r) in out_relevance.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let w = layer.row(j);
        let b = layer.bias[j];
        let s: f64 = w.iter().zip(inputs).map(|(w, x)| w * x).sum::<f64>() + b;
        let scale = r / (s + epsilon * sign(s));
        let share = b / n;
        for k in 0..layer.fan_in {
            rel[k] += (w[k] * inputs[k] + share) * scale;
        }
    }
    Ok(rel)
}

/// Number of layers relevance passes through: all of them, or all but a
/// softmax head.
pub(crate) fn propagated_layers(net: &Network) -> usize {
    let n = net.layers().len();
    if net.layers()[n - 1].activation == Activation::Softmax {
        n - 1
    } else {
        n
    }
}

/// Propagates `init` from the top of the network down to its input.
///
/// For a softmax network `init` holds the relevance of the head's inputs (the
/// last hidden activations) and the head itself is skipped; otherwise it holds
/// the relevance of the outputs.
pub fn lrp_network(
    net: &Network,
    input: &[f64],
    init: &[f64],
    epsilon: f64,
) -> Result<RelevanceMap> {
    let trace = net.trace(&Matrix::row_vector(input))?;
    lrp_trace(net, &trace, 0, init, epsilon)
}

/// As [`lrp_network`] for row `row` of an existing batch trace.
pub fn lrp_trace(
    net: &Network,
    trace: &Trace,
    row: usize,
    init: &[f64],
    epsilon: f64,
) -> Result<RelevanceMap> {
    let top = propagated_layers(net);
    let expected = if top == 0 {
        net.input_dim()
    } else {
        net.layers()[top - 1].fan_out
    };
    if init.len() != expected {
        return Err(Error::Shape(format!(
            "relevance initialization has {} entries, expected {expected}",
            init.len()
        )));
    }
    let mut per_layer = vec![init.to_vec()];
    for l in (0..top).rev() {
        let x = trace.layers[l].input.row(row);
        let below = lrp_layer(
            &net.layers()[l],
            x,
            per_layer.last().expect("non-empty"),
            epsilon,
        )?;
        per_layer.push(below);
    }
    per_layer.reverse();
    Ok(RelevanceMap { per_layer, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(w: Vec<f64>, b: f64, act: Activation) -> DenseLayer {
        DenseLayer::new(w.len(), 1, w, vec![b], act).unwrap()
    }

    #[test]
    fn single_input_takes_everything() {
        let l = single(vec![1.0], 0.0, Activation::Relu);
        assert_eq!(lrp_layer(&l, &[3.0], &[5.0], 0.0).unwrap(), vec![5.0]);
    }

    #[test]
    fn three_input_shares() {
        let l = single(vec![1.0, 2.0, 3.0], -1.0, Activation::Relu);
        let r = lrp_layer(&l, &[-1.0, 2.0, -1.0], &[1.0], 0.0).unwrap();
        let want = [4.0 / 3.0, -11.0 / 3.0, 10.0 / 3.0];
        for (a, w) in r.iter().zip(want) {
            assert!((a - w).abs() < 1e-14, "{r:?}");
        }
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn activation_factor_cancels() {
        for act in [Activation::Identity, Activation::Sa, Activation::ShapLu] {
            let l = single(vec![1.0, 2.0, 3.0], -1.0, act);
            let r = lrp_layer(&l, &[-1.0, 2.0, -1.0], &[1.0], 0.0).unwrap();
            assert!((r[0] - 4.0 / 3.0).abs() < 1e-14);
        }
        let soft = single(vec![1.0], 0.0, Activation::Softmax);
        assert!(lrp_layer(&soft, &[1.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn epsilon_guards_zero_denominator() {
        let l = single(vec![1.0, -1.0], 0.0, Activation::Relu);
        let r = lrp_layer(&l, &[1.0, 1.0], &[1.0], 1e-6).unwrap();
        assert!(r.iter().all(|v| v.is_finite()));
        assert!(lrp_layer(&l, &[1.0], &[1.0], 0.0).is_err());
        assert!(lrp_layer(&l, &[1.0, 1.0], &[1.0], -1.0).is_err());
    }

    #[test]
    fn identity_stack_passes_relevance() {
        let eye = |n: usize| {
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                w[i * n + i] = 1.0;
            }
            DenseLayer::new(n, n, w, vec![0.0; n], Activation::Identity).unwrap()
        };
        let net = Network::new(vec![eye(3), eye(3)]).unwrap();
        let init = [0.25, -1.0, 2.0];
        let map = lrp_network(&net, &[1.0, 2.0, 3.0], &init, 0.0).unwrap();
        assert_eq!(map.per_layer.len(), 3);
        assert_eq!(map.input(), &init);
        assert_eq!(map.conservation_error(), 0.0);
    }

    #[test]
    fn softmax_head_is_skipped() {
        let net = Network::mlp(&[4, 3, 2], Activation::Relu, Activation::Softmax).unwrap();
        let map = lrp_network(&net, &[0.0; 4], &[1.0, 1.0, 1.0], 1e-6).unwrap();
        assert_eq!(map.per_layer.len(), 2);
        assert_eq!(map.input().len(), 4);
        assert!(lrp_network(&net, &[0.0; 4], &[1.0, 1.0], 1e-6).is_err());
    }
}
