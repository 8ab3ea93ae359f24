use super::neuron::{ApproxStats, NeuronView};
use super::{Method, ShapleyResult};
use crate::error::{Error, Result};

pub fn approx_stats(nv: &NeuronView) -> ApproxStats {
    ApproxStats::of(nv)
}

/// Analytical Shapley approximation `α_k = Φ((μ+b)/σ) · (p_k + b/n)`.
pub fn approx_shapley(nv: &NeuronView) -> ShapleyResult {
    let st = ApproxStats::of(nv);
    let share = nv.bias() / nv.n() as f64;
    ShapleyResult {
        alpha: nv
            .products()
            .iter()
            .map(|p| st.phi_gate * (p + share))
            .collect(),
        method: Method::Approx,
        stderr: None,
        baseline: 0.0,
    }
}

/// Shapley Activation: `Φ((μ+b)/σ) · (Σ p + b)`.
pub fn sa_value(nv: &NeuronView) -> f64 {
    ApproxStats::of(nv).phi_gate * nv.pre_activation()
}

/// Gradient of a neuron output with respect to its inputs, weights and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapGradient {
    pub d_x: Vec<f64>,
    pub d_w: Vec<f64>,
    pub d_b: f64,
    /// Whether the gate-derivative terms of the input and weight gradients
    /// were kept.
    pub include_correction: bool,
}

fn check_factors(nv: &NeuronView, weights: &[f64], inputs: &[f64]) -> Result<()> {
    let n = nv.n();
    if weights.len() != n || inputs.len() != n {
        return Err(Error::Shape(format!(
            "neuron has {n} inputs, got {} weights and {} inputs",
            weights.len(),
            inputs.len()
        )));
    }
    for (k, ((w, x), p)) in weights.iter().zip(inputs).zip(nv.products()).enumerate() {
        if (w * x - p).abs() > 1e-12 * p.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "product {k} is {p}, but w·x = {}",
                w * x
            )));
        }
    }
    Ok(())
}

/// `∂z/∂p_k = 1/(2σ) − (μ+b)(p_k+μ)/(6σ³)` for `z = (μ+b)/σ`.
fn gate_arg_slope(st: &ApproxStats, p: f64) -> f64 {
    let centre = st.mu + st.bias();
    let s = st.sigma;
    0.5 / s - centre * (p + st.mu) / (6.0 * s * s * s)
}

/// Exact gradient of [`sa_value`], including the dependence of the gate on
/// every product through μ and σ.
pub fn sa_gradient(nv: &NeuronView, weights: &[f64], inputs: &[f64]) -> Result<ShapGradient> {
    check_factors(nv, weights, inputs)?;
    let st = ApproxStats::of(nv);
    if st.is_degenerate() {
        return Ok(degenerate_gradient(&st, weights, inputs));
    }
    let total = nv.pre_activation();
    let dens = st.density();
    let per_product = |p: f64| st.phi_gate + dens * total * gate_arg_slope(&st, p);
    let dp: Vec<f64> = nv.products().iter().map(|&p| per_product(p)).collect();
    Ok(ShapGradient {
        d_x: dp.iter().zip(weights).map(|(d, w)| d * w).collect(),
        d_w: dp.iter().zip(inputs).map(|(d, x)| d * x).collect(),
        d_b: st.phi_gate + dens * total / st.sigma,
        include_correction: true,
    })
}

/// Per-input Shapley gradients `∂α_k/∂x_k`, `∂α_k/∂w_k` and `Σ_k ∂α_k/∂b`,
/// the diagonal of the Jacobian of the approximate Shapley values.
///
/// With `include_correction == false` the terms coming from the derivative
/// of the gate are dropped from the input and weight gradients; the bias
/// gradient is unaffected.
pub fn shapley_gradient(
    nv: &NeuronView,
    weights: &[f64],
    inputs: &[f64],
    include_correction: bool,
) -> Result<ShapGradient> {
    check_factors(nv, weights, inputs)?;
    let st = ApproxStats::of(nv);
    if st.is_degenerate() {
        let mut g = degenerate_gradient(&st, weights, inputs);
        g.include_correction = include_correction;
        return Ok(g);
    }
    let share = nv.bias() / nv.n() as f64;
    let dens = st.density();
    let g: Vec<f64> = nv.products().iter().map(|p| dens * (p + share)).collect();
    let dp: Vec<f64> = nv
        .products()
        .iter()
        .zip(&g)
        .map(|(&p, gk)| {
            if include_correction {
                st.phi_gate + gk * gate_arg_slope(&st, p)
            } else {
                st.phi_gate
            }
        })
        .collect();
    Ok(ShapGradient {
        d_x: dp.iter().zip(weights).map(|(d, w)| d * w).collect(),
        d_w: dp.iter().zip(inputs).map(|(d, x)| d * x).collect(),
        d_b: st.phi_gate + g.iter().sum::<f64>() / st.sigma,
        include_correction,
    })
}

fn degenerate_gradient(st: &ApproxStats, weights: &[f64], inputs: &[f64]) -> ShapGradient {
    let gate = st.phi_gate;
    ShapGradient {
        d_x: weights.iter().map(|w| gate * w).collect(),
        d_w: inputs.iter().map(|x| gate * x).collect(),
        d_b: gate,
        include_correction: true,
    }
}

/// The gate `Φ((μ+b)/σ)` with product `k` swept over `values`, all other
/// products held fixed.
pub fn gate_profile(nv: &NeuronView, k: usize, values: &[f64]) -> Result<Vec<f64>> {
    if k >= nv.n() {
        return Err(Error::InvalidArgument(format!(
            "input index {k} out of range for {} inputs",
            nv.n()
        )));
    }
    let (rest_sum, rest_sq) = nv
        .products()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .fold((0.0, 0.0), |(s, q), (_, &p)| (s + p, q + p * p));
    Ok(values
        .iter()
        .map(|&v| ApproxStats::from_moments(rest_sum + v, rest_sq + v * v, nv.bias()).phi_gate)
        .collect())
}
