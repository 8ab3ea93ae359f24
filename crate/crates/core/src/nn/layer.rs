use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Activation backend of a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    /// Shapley Activation, forward and backward consistent.
    Sa,
    /// ReLU forward with the Shapley gradient in the backward pass.
    #[serde(rename = "shaplu")]
    ShapLu,
    Softmax,
}

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Identity,
        Activation::Relu,
        Activation::Sa,
        Activation::ShapLu,
        Activation::Softmax,
    ];

    /// Tag byte used in checkpoints.
    pub fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Sa => 2,
            Activation::ShapLu => 3,
            Activation::Softmax => 4,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Sa => "sa",
            Activation::ShapLu => "shaplu",
            Activation::Softmax => "softmax",
        }
    }

    /// Layers whose backward pass needs the Shapley statistics.
    pub fn uses_shapley_stats(self) -> bool {
        matches!(self, Activation::Sa | Activation::ShapLu)
    }

    /// Activations whose forward pass is `max(s, 0)`.
    pub fn is_relu_forward(self) -> bool {
        matches!(self, Activation::Relu | Activation::ShapLu)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown activation {s:?}")))
    }
}

/// Fully connected layer `y = f(W x + b)` with `W` stored row-major as
/// `[fan_out x fan_in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        Self {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            bias: vec![0.0; fan_out],
            activation,
        }
    }

    pub fn new(
        fan_in: usize,
        fan_out: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if fan_in == 0 || fan_out == 0 {
            return Err(Error::Shape("layer dimensions must be positive".into()));
        }
        if weights.len() != fan_in * fan_out || bias.len() != fan_out {
            return Err(Error::Shape(format!(
                "{fan_out}x{fan_in} layer given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            fan_in,
            fan_out,
            weights,
            bias,
            activation,
        })
    }

    /// Weights of output neuron `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.fan_in..(j + 1) * self.fan_in]
    }

    pub fn weight(&self, j: usize, k: usize) -> f64 {
        self.weights[j * self.fan_in + k]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}
