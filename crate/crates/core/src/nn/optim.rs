use serde::{Deserialize, Serialize};

use super::network::{Gradients, LayerGrad, Network};
use crate::error::{Error, Result};

/// Optimizer choice with its hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl OptimizerKind {
    pub fn sgd(lr: f64) -> Self {
        OptimizerKind::Sgd { lr }
    }

    /// Adam with β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn adam(lr: f64) -> Self {
        OptimizerKind::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        match *self {
            OptimizerKind::Sgd { lr } | OptimizerKind::Adam { lr, .. } => lr,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd { .. } => "sgd",
            OptimizerKind::Adam { .. } => "adam",
        }
    }
}

/// One Adam update of a flat parameter slice at step `t` (1-based).
#[allow(clippy::too_many_arguments)]
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

pub fn sgd_update(params: &mut [f64], grads: &[f64], lr: f64) {
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
}

/// Optimizer with its per-parameter moment accumulators.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    step: u64,
    m: Vec<LayerGrad>,
    v: Vec<LayerGrad>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, net: &Network) -> Self {
        let zeros: Vec<LayerGrad> = net
            .layers()
            .iter()
            .map(|l| LayerGrad {
                weights: vec![0.0; l.weights.len()],
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        Self {
            kind,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update. Non-finite gradients are rejected before any
    /// parameter changes.
    pub fn step(&mut self, net: &mut Network, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != net.layers().len() {
            return Err(Error::Shape("gradient does not match network".into()));
        }
        if let Some(i) = grads.layers.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient of layer {i}")));
        }
        self.step += 1;
        let t = self.step;
        for (i, (layer, g)) in net.layers_mut().iter_mut().zip(&grads.layers).enumerate() {
            match self.kind {
                OptimizerKind::Sgd { lr } => {
                    sgd_update(&mut layer.weights, &g.weights, lr);
                    sgd_update(&mut layer.bias, &g.bias, lr);
                }
                OptimizerKind::Adam {
                    lr,
                    beta1,
                    beta2,
                    eps,
                } => {
                    let (m, v) = (&mut self.m[i], &mut self.v[i]);
                    adam_update(
                        &mut layer.weights,
                        &g.weights,
                        &mut m.weights,
                        &mut v.weights,
                        t,
                        lr,
                        beta1,
                        beta2,
                        eps,
                    );
                    adam_update(
                        &mut layer.bias,
                        &g.bias,
                        &mut m.bias,
                        &mut v.bias,
                        t,
                        lr,
                        beta1,
                        beta2,
                        eps,
                    );
                }
            }
            if !layer.is_finite() {
                return Err(Error::NonFinite(format!("parameters of layer {i}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_scalar() {
        let mut p = [0.0];
        sgd_update(&mut p, &[1.0], 0.1);
        assert_eq!(p[0], -0.1);
    }

    #[test]
    fn adam_first_step_is_lr() {
        for g in [3.0, -0.02, 1e4] {
            let (mut p, mut m, mut v) = ([0.0], [0.0], [0.0]);
            adam_update(&mut p, &[g], &mut m, &mut v, 1, 0.01, 0.9, 0.999, 1e-8);
            assert!((p[0] + 0.01 * f64::signum(g)).abs() < 1e-8, "{p:?}");
        }
    }

    #[test]
    fn adam_descends_quadratic() {
        let (mut p, mut m, mut v) = ([1.0], [0.0], [0.0]);
        for t in 1..=100 {
            let g = 2.0 * p[0];
            adam_update(&mut p, &[g], &mut m, &mut v, t, 0.01, 0.9, 0.999, 1e-8);
        }
        assert!(p[0].abs() < 0.5, "{}", p[0]);
        // independent scalar loop in Python
        assert!((p[0] - 0.224_446_045_231_878_8).abs() < 1e-9);
    }
}
