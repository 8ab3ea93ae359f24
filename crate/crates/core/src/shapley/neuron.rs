use serde::{Deserialize, Serialize};

use super::normal::{norm_cdf, norm_pdf};
use crate::error::{Error, Result};

/// Below this spread the analytical gate is replaced by a step function.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Largest input count accepted by exact enumeration.
pub const N_MAX_EXACT: usize = 10;

/// One neuron evaluation: the weighted inputs `w_i * x_i` and the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronView {
    products: Vec<f64>,
    bias: f64,
}

impl NeuronView {
    pub fn new(products: Vec<f64>, bias: f64) -> Result<Self> {
        if products.is_empty() {
            return Err(Error::InvalidNeuron(
                "a neuron needs at least one input".into(),
            ));
        }
        if let Some(i) = products.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidNeuron(format!("product {i} is not finite")));
        }
        if !bias.is_finite() {
            return Err(Error::InvalidNeuron("bias is not finite".into()));
        }
        let total = products.iter().sum::<f64>() + bias;
        if !total.is_finite() {
            return Err(Error::InvalidNeuron("pre-activation overflows".into()));
        }
        Ok(Self { products, bias })
    }

    pub fn from_weights(weights: &[f64], inputs: &[f64], bias: f64) -> Result<Self> {
        if weights.len() != inputs.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} inputs",
                weights.len(),
                inputs.len()
            )));
        }
        Self::new(
            weights.iter().zip(inputs).map(|(w, x)| w * x).collect(),
            bias,
        )
    }

    pub fn products(&self) -> &[f64] {
        &self.products
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn n(&self) -> usize {
        self.products.len()
    }

    /// Pre-activation `s = Σ products + b`.
    pub fn pre_activation(&self) -> f64 {
        self.products.iter().sum::<f64>() + self.bias
    }

    pub fn relu(&self) -> f64 {
        self.pre_activation().max(0.0)
    }

    /// Copy with product `k` replaced.
    pub fn with_product(&self, k: usize, value: f64) -> Result<Self> {
        if k >= self.n() {
            return Err(Error::InvalidArgument(format!(
                "input index {k} out of range for {} inputs",
                self.n()
            )));
        }
        let mut products = self.products.clone();
        products[k] = value;
        Self::new(products, self.bias)
    }
}

/// Moment statistics behind the analytical Shapley approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxStats {
    pub mu: f64,
    pub sigma: f64,
    pub phi_gate: f64,
    bias: f64,
}

impl ApproxStats {
    pub fn of(nv: &NeuronView) -> Self {
        let (sum, sum_sq) = nv
            .products()
            .iter()
            .fold((0.0, 0.0), |(s, q), &p| (s + p, q + p * p));
        Self::from_moments(sum, sum_sq, nv.bias())
    }

    /// Statistics from `Σ p` and `Σ p²`.
    ///
    /// μ = Σp / 2 and σ² = Σp² / 6 + (Σp)² / 12. When σ ≤ [`SIGMA_FLOOR`] the
    /// gate is the step function of μ + b, with value ½ at zero.
    pub fn from_moments(sum: f64, sum_sq: f64, bias: f64) -> Self {
        let mu = 0.5 * sum;
        let sigma = (sum_sq / 6.0 + sum * sum / 12.0).max(0.0).sqrt();
        let centre = mu + bias;
        let phi_gate = if sigma <= SIGMA_FLOOR {
            step(centre)
        } else {
            norm_cdf(centre / sigma)
        };
        Self {
            mu,
            sigma,
            phi_gate,
            bias,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma <= SIGMA_FLOOR
    }

    /// (μ + b) / σ, or `None` on the degenerate branch.
    pub fn standardized(&self) -> Option<f64> {
        (!self.is_degenerate()).then(|| (self.mu + self.bias) / self.sigma)
    }

    /// φ((μ + b) / σ); zero on the degenerate branch.
    pub fn density(&self) -> f64 {
        self.standardized().map_or(0.0, norm_pdf)
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }
}

fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// How the bias enters the coalition value of a subset of inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    /// `v(S) = ReLU(Σ_S p + b)`; the empty coalition is worth `ReLU(b)`.
    #[default]
    Anchored,
    /// `v(S) = ReLU(Σ_S p + |S|/n · b)`; the empty coalition is worth 0.
    Shared,
}

impl BiasMode {
    /// Bias seen by a coalition of `size` out of `n` inputs.
    pub fn coalition_bias(self, bias: f64, size: usize, n: usize) -> f64 {
        match self {
            BiasMode::Anchored => bias,
            BiasMode::Shared => bias * size as f64 / n as f64,
        }
    }

    pub fn baseline(self, bias: f64) -> f64 {
        match self {
            BiasMode::Anchored => bias.max(0.0),
            BiasMode::Shared => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_views() {
        assert!(NeuronView::new(vec![], 0.0).is_err());
        assert!(NeuronView::new(vec![f64::NAN], 0.0).is_err());
        assert!(NeuronView::new(vec![1.0], f64::INFINITY).is_err());
        assert!(NeuronView::new(vec![f64::MAX, f64::MAX], 0.0).is_err());
        assert!(NeuronView::from_weights(&[1.0], &[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn table_one_stats() {
        let nv = NeuronView::new(vec![-1.0, 4.0, -3.0], -1.0).unwrap();
        let st = ApproxStats::of(&nv);
        assert_eq!(st.mu, 0.0);
        assert!((st.sigma * st.sigma - 26.0 / 6.0).abs() < 1e-14);
        assert!((st.sigma - 2.081_665_999_466_132_7).abs() < 1e-14);
        assert!((st.standardized().unwrap() + 0.480_384_461_415_261_4).abs() < 1e-14);
        assert!((st.phi_gate - 0.315_477_020_592_085_4).abs() < 1e-13);
    }

    #[test]
    fn single_input_stats() {
        let st = ApproxStats::of(&NeuronView::new(vec![2.0], 0.0).unwrap());
        assert_eq!(st.mu, 1.0);
        assert!((st.sigma - 1.0).abs() < 1e-15);
        assert!((st.phi_gate - 0.841_344_746_068_542_9).abs() < 1e-13);
    }

    #[test]
    fn degenerate_gate_is_a_step() {
        let zero = ApproxStats::of(&NeuronView::new(vec![0.0; 4], 0.0).unwrap());
        assert!(zero.is_degenerate());
        assert_eq!(zero.phi_gate, 0.5);
        assert_eq!(zero.density(), 0.0);
        let on = ApproxStats::of(&NeuronView::new(vec![0.0; 4], 0.3).unwrap());
        assert_eq!(on.phi_gate, 1.0);
        let off = ApproxStats::of(&NeuronView::new(vec![1e-14, 0.0], -0.3).unwrap());
        assert_eq!(off.phi_gate, 0.0);
    }
}
