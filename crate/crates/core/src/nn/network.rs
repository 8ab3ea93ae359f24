use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::layer::{Activation, DenseLayer};
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::rng;
use crate::shapley::ApproxStats;

/// Everything one layer computed during a forward pass.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    /// Layer input, `[batch x fan_in]`.
    pub input: Matrix,
    /// Pre-activations `s = W x + b`, `[batch x fan_out]`.
    pub pre: Matrix,
    /// Activations, `[batch x fan_out]`.
    pub output: Matrix,
    /// Per-sample, per-neuron Shapley statistics (row-major `[batch x
    /// fan_out]`), kept for SA and ShapLU layers only.
    pub stats: Option<Vec<ApproxStats>>,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub layers: Vec<LayerTrace>,
}

impl Trace {
    pub fn output(&self) -> &Matrix {
        &self.layers.last().expect("network has layers").output
    }

    pub fn batch_size(&self) -> usize {
        self.output().rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerGrad {
    fn zeros_like(layer: &DenseLayer) -> Self {
        Self {
            weights: vec![0.0; layer.weights.len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    pub fn norm_sq(&self) -> f64 {
        self.weights.iter().chain(&self.bias).map(|v| v * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
    /// Gradient with respect to the network input, when requested.
    pub input: Option<Matrix>,
}

/// Where the incoming gradient of the final layer attaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradSeed {
    /// Gradient with respect to the final activations.
    Output,
    /// Gradient with respect to the final pre-activations (fused
    /// softmax/cross-entropy).
    Logits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InitScheme {
    #[default]
    GlorotUniform,
}

/// Ordered stack of dense layers.
#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<DenseLayer>,
    /// Keep the gate-derivative terms in ShapLU backward passes.
    pub shaplu_correction: bool,
    cache: Option<Trace>,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("a network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].fan_in != pair[0].fan_out {
                return Err(Error::Shape(format!(
                    "layer {} expects {} inputs but layer {i} produces {}",
                    i + 1,
                    pair[1].fan_in,
                    pair[0].fan_out
                )));
            }
        }
        let last = layers.len() - 1;
        if let Some(i) = layers[..last]
            .iter()
            .position(|l| l.activation == Activation::Softmax)
        {
            return Err(Error::Shape(format!(
                "softmax is only allowed on the final layer, found on layer {i}"
            )));
        }
        Ok(Self {
            layers,
            shaplu_correction: false,
            cache: None,
        })
    }

    /// Zero-initialised multilayer perceptron with `sizes = [in, h1, ..., out]`.
    pub fn mlp(sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Shape("need at least input and output sizes".into()));
        }
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                DenseLayer::new(
                    sizes[i],
                    sizes[i + 1],
                    vec![0.0; sizes[i] * sizes[i + 1]],
                    vec![0.0; sizes[i + 1]],
                    act,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Mutable parameter access. Drops the forward cache.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        self.cache = None;
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(DenseLayer::is_finite)
    }

    /// Copy with every hidden layer switched to `act`; the final layer keeps
    /// its activation.
    pub fn with_hidden_activation(&self, act: Activation) -> Self {
        let mut net = self.clone();
        net.cache = None;
        let last = net.layers.len() - 1;
        for layer in &mut net.layers[..last] {
            layer.activation = act;
        }
        net
    }

    /// Draws weights from `U(-L, L)`, `L = sqrt(6 / (fan_in + fan_out))`, and
    /// zeroes biases. Layers are filled in order from one seeded stream.
    pub fn init_params(&mut self, scheme: InitScheme, seed: u64) {
        let InitScheme::GlorotUniform = scheme;
        let mut g = rng::seeded(seed);
        for layer in self.layers_mut() {
            let limit = glorot_limit(layer.fan_in, layer.fan_out);
            for w in &mut layer.weights {
                *w = g.gen_range(-limit..limit);
            }
            layer.bias.iter_mut().for_each(|b| *b = 0.0);
        }
    }

    /// Forward pass without touching the cache.
    pub fn trace(&self, inputs: &Matrix) -> Result<Trace> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "network takes {} inputs, batch has {}",
                self.input_dim(),
                inputs.cols()
            )));
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        let mut current = inputs.clone();
        for layer in &self.layers {
            let t = layer_forward(layer, current);
            current = t.output.clone();
            layers.push(t);
        }
        Ok(Trace { layers })
    }

    /// Forward pass that keeps its intermediate values for [`Network::backward`].
    pub fn forward(&mut self, inputs: &Matrix) -> Result<Matrix> {
        let trace = self.trace(inputs)?;
        let out = trace.output().clone();
        self.cache = Some(trace);
        Ok(out)
    }

    pub fn predict(&self, inputs: &Matrix) -> Result<Matrix> {
        Ok(self.trace(inputs)?.output().clone())
    }

    pub fn last_trace(&self) -> Option<&Trace> {
        self.cache.as_ref()
    }

    /// Backward pass from a gradient on the final activations. Also returns
    /// the gradient with respect to the network input.
    pub fn backward(&self, output_grad: &Matrix) -> Result<Gradients> {
        let trace = self.cache.as_ref().ok_or(Error::NotForwarded)?;
        self.backward_trace(trace, output_grad, GradSeed::Output, true)
    }

    /// Backward pass from a gradient on the final pre-activations, as
    /// produced by [`super::cross_entropy`].
    pub fn backward_logits(&self, logit_grad: &Matrix) -> Result<Gradients> {
        let trace = self.cache.as_ref().ok_or(Error::NotForwarded)?;
        self.backward_trace(trace, logit_grad, GradSeed::Logits, true)
    }

    /// Backward pass over an explicit trace.
    ///
    /// Per layer the backward rule is selected by the activation: ReLU uses
    /// the subgradient (0 at the kink), SA its exact gradient, ShapLU the
    /// Shapley gradient regardless of its ReLU forward.
    pub fn backward_trace(
        &self,
        trace: &Trace,
        grad: &Matrix,
        seed: GradSeed,
        input_grad: bool,
    ) -> Result<Gradients> {
        if trace.layers.len() != self.layers.len() {
            return Err(Error::Shape("trace does not belong to this network".into()));
        }
        let out = trace.output();
        if grad.rows() != out.rows() || grad.cols() != out.cols() {
            return Err(Error::Shape(format!(
                "gradient is {}x{}, output is {}x{}",
                grad.rows(),
                grad.cols(),
                out.rows(),
                out.cols()
            )));
        }
        let n = self.layers.len();
        let mut grads: Vec<LayerGrad> = self.layers.iter().map(LayerGrad::zeros_like).collect();
        let mut upstream = grad.clone();
        for l in (0..n).rev() {
            let want_dx = l > 0 || input_grad;
            let from_logits = l + 1 == n && seed == GradSeed::Logits;
            let dx = layer_backward(
                &self.layers[l],
                &trace.layers[l],
                &upstream,
                from_logits,
                self.shaplu_correction,
                &mut grads[l],
                want_dx,
            );
            if let Some(dx) = dx {
                upstream = dx;
            }
        }
        Ok(Gradients {
            layers: grads,
            input: input_grad.then_some(upstream),
        })
    }
}

pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn layer_forward(layer: &DenseLayer, input: Matrix) -> LayerTrace {
    let batch = input.rows();
    let (fan_in, fan_out) = (layer.fan_in, layer.fan_out);
    let need_stats = layer.activation.uses_shapley_stats();
    let mut pre = Matrix::zeros(batch, fan_out);
    let mut output = Matrix::zeros(batch, fan_out);
    let mut stats = need_stats.then(|| Vec::with_capacity(batch * fan_out));
    let mut nz: Vec<usize> = Vec::with_capacity(fan_in);
    for b in 0..batch {
        let x = input.row(b);
        nz.clear();
        nz.extend((0..fan_in).filter(|&k| x[k] != 0.0));
        let s_row = pre.row_mut(b);
        for (j, s_out) in s_row.iter_mut().enumerate() {
            let w = layer.row(j);
            let mut sum = 0.0;
            if let Some(st) = stats.as_mut() {
                let mut sum_sq = 0.0;
                for &k in &nz {
                    let p = w[k] * x[k];
                    sum += p;
                    sum_sq += p * p;
                }
                st.push(ApproxStats::from_moments(sum, sum_sq, layer.bias[j]));
            } else {
                for &k in &nz {
                    sum += w[k] * x[k];
                }
            }
            *s_out = sum + layer.bias[j];
        }
        let y = output.row_mut(b);
        let s = pre.row(b);
        match layer.activation {
            Activation::Identity => y.copy_from_slice(s),
            Activation::Relu | Activation::ShapLu => {
                for (yj, &sj) in y.iter_mut().zip(s) {
                    *yj = if sj > 0.0 { sj } else { 0.0 };
                }
            }
            Activation::Sa => {
                let st = &stats.as_ref().expect("stats kept for SA")[b * fan_out..];
                for j in 0..fan_out {
                    y[j] = st[j].phi_gate * s[j];
                }
            }
            Activation::Softmax => softmax_into(s, y),
        }
    }
    LayerTrace {
        input,
        pre,
        output,
        stats,
    }
}

/// Max-shifted softmax.
pub fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Backward coefficients of one neuron evaluation.
///
/// The derivative of the output with respect to a product `p = w x` is
/// `D(p) = c0 + c1 p + c2 p²`; the bias derivative is `e`.
#[derive(Debug, Clone, Copy)]
struct Coeffs {
    c0: f64,
    c1: f64,
    c2: f64,
    e: f64,
}

impl Coeffs {
    fn linear(c: f64) -> Self {
        Self {
            c0: c,
            c1: 0.0,
            c2: 0.0,
            e: c,
        }
    }

    fn shapley(st: &ApproxStats, fan_in: usize, activation: Activation, correction: bool) -> Self {
        let gate = st.phi_gate;
        if st.is_degenerate() {
            return Self::linear(gate);
        }
        let dens = st.density();
        let sigma = st.sigma;
        let centre = st.mu + st.bias();
        let total = 2.0 * st.mu + st.bias();
        let e = gate + dens * total / sigma;
        // ∂z/∂p = a1 - a2 (p + μ)
        let a1 = 0.5 / sigma;
        let a2 = centre / (6.0 * sigma * sigma * sigma);
        let a = a1 - a2 * st.mu;
        match (activation, correction) {
            (Activation::Sa, _) => Self {
                c0: gate + dens * total * a,
                c1: -dens * total * a2,
                c2: 0.0,
                e,
            },
            (_, true) => {
                let share = st.bias() / fan_in as f64;
                Self {
                    c0: gate + dens * share * a,
                    c1: dens * (a - share * a2),
                    c2: -dens * a2,
                    e,
                }
            }
            (_, false) => Self {
                c0: gate,
                c1: 0.0,
                c2: 0.0,
                e,
            },
        }
    }

    fn is_linear(&self) -> bool {
        self.c1 == 0.0 && self.c2 == 0.0
    }
}

fn layer_backward(
    layer: &DenseLayer,
    t: &LayerTrace,
    upstream: &Matrix,
    from_logits: bool,
    correction: bool,
    grad: &mut LayerGrad,
    want_dx: bool,
) -> Option<Matrix> {
    let batch = t.input.rows();
    let (fan_in, fan_out) = (layer.fan_in, layer.fan_out);
    let mut dx = want_dx.then(|| Matrix::zeros(batch, fan_in));
    let mut g = vec![0.0; fan_out];
    let mut coeffs = vec![Coeffs::linear(1.0); fan_out];
    for b in 0..batch {
        let x = t.input.row(b);
        let up = upstream.row(b);
        g.copy_from_slice(up);
        match layer.activation {
            Activation::Identity => coeffs.fill(Coeffs::linear(1.0)),
            Activation::Softmax => {
                coeffs.fill(Coeffs::linear(1.0));
                if !from_logits {
                    let p = t.output.row(b);
                    let dot: f64 = p.iter().zip(up).map(|(a, c)| a * c).sum();
                    for j in 0..fan_out {
                        g[j] = p[j] * (up[j] - dot);
                    }
                }
            }
            Activation::Relu => {
                let s = t.pre.row(b);
                for j in 0..fan_out {
                    coeffs[j] = Coeffs::linear(if s[j] > 0.0 { 1.0 } else { 0.0 });
                }
            }
            Activation::Sa | Activation::ShapLu => {
                let st = &t.stats.as_ref().expect("stats kept for Shapley layers")
                    [b * fan_out..(b + 1) * fan_out];
                for j in 0..fan_out {
                    coeffs[j] = Coeffs::shapley(&st[j], fan_in, layer.activation, correction);
                }
            }
        }
        for j in 0..fan_out {
            let gj = g[j];
            if gj == 0.0 {
                continue;
            }
            let c = coeffs[j];
            grad.bias[j] += gj * c.e;
            let w = layer.row(j);
            let dw = &mut grad.weights[j * fan_in..(j + 1) * fan_in];
            if c.is_linear() {
                let d = gj * c.c0;
                if d == 0.0 {
                    continue;
                }
                for k in 0..fan_in {
                    dw[k] += d * x[k];
                }
                if let Some(dx) = dx.as_mut() {
                    let row = dx.row_mut(b);
                    for k in 0..fan_in {
                        row[k] += d * w[k];
                    }
                }
            } else {
                for k in 0..fan_in {
                    let p = w[k] * x[k];
                    let d = gj * (c.c0 + p * (c.c1 + c.c2 * p));
                    dw[k] += d * x[k];
                    if let Some(dx) = dx.as_mut() {
                        dx.row_mut(b)[k] += d * w[k];
                    }
                }
            }
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_one_layer(act: Activation) -> Network {
        let layer = DenseLayer::new(3, 1, vec![1.0, 2.0, 3.0], vec![-1.0], act).unwrap();
        Network::new(vec![layer]).unwrap()
    }

    #[test]
    fn identity_passes_through() {
        let mut w = vec![0.0; 9];
        w[0] = 1.0;
        w[4] = 1.0;
        w[8] = 1.0;
        let layer = DenseLayer::new(3, 3, w, vec![0.0; 3], Activation::Identity).unwrap();
        let mut net = Network::new(vec![layer]).unwrap();
        let x = Matrix::from_rows(&[[0.5, -2.0, 3.0], [1.0, 0.0, -1.0]]).unwrap();
        assert_eq!(net.forward(&x).unwrap(), x);
    }

    #[test]
    fn table_one_neuron_forward() {
        let x = Matrix::row_vector(&[-1.0, 2.0, -1.0]);
        let relu = table_one_layer(Activation::Relu).predict(&x).unwrap();
        assert_eq!(relu.get(0, 0), 0.0);
        let sa = table_one_layer(Activation::Sa).predict(&x).unwrap();
        assert!((sa.get(0, 0) + 0.315_477_020_592_085_4).abs() < 1e-13);
    }

    #[test]
    fn shapely_layout_checks() {
        let a = DenseLayer::zeros(3, 2, Activation::Softmax);
        let b = DenseLayer::zeros(2, 2, Activation::Relu);
        assert!(Network::new(vec![a, b]).is_err());
        let a = DenseLayer::zeros(3, 2, Activation::Relu);
        let b = DenseLayer::zeros(3, 2, Activation::Relu);
        assert!(Network::new(vec![a, b]).is_err());
        let mut net = Network::mlp(&[3, 2], Activation::Relu, Activation::Identity).unwrap();
        assert!(net.forward(&Matrix::zeros(1, 4)).is_err());
        assert!(matches!(
            net.backward(&Matrix::zeros(1, 2)),
            Err(Error::NotForwarded)
        ));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let logits = [-100.0, 100.0, 99.5, 0.0, -3.0];
        let mut out = [0.0; 5];
        softmax_into(&logits, &mut out);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(out.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn glorot_is_deterministic() {
        assert_eq!(glorot_limit(3, 3), 1.0);
        let mut a = Network::mlp(&[4, 5, 3], Activation::Relu, Activation::Softmax).unwrap();
        let mut b = a.clone();
        a.init_params(InitScheme::GlorotUniform, 11);
        b.init_params(InitScheme::GlorotUniform, 11);
        assert_eq!(a.layers(), b.layers());
        let l = glorot_limit(4, 5);
        assert!(a.layers()[0].weights.iter().all(|w| w.abs() <= l));
        assert!(a.layers()[0].bias.iter().all(|&v| v == 0.0));
    }
}
