//! Shapley values of a single ReLU neuron's weighted inputs.
//!
//! Three estimators share one result type: exact enumeration over orderings
//! ([`exact_shapley`]), permutation sampling ([`mc_shapley`]) and the
//! closed-form normal approximation ([`approx_shapley`]). The approximation
//! also yields the Shapley Activation ([`sa_value`]) and two backward rules:
//! its exact gradient ([`sa_gradient`]) and the per-input Shapley gradient
//! ([`shapley_gradient`]) used by ShapLU layers.

mod approx;
mod exact;
mod monte_carlo;
mod neuron;
mod normal;

use serde::{Deserialize, Serialize};

pub use approx::{
    approx_shapley, approx_stats, gate_profile, sa_gradient, sa_value, shapley_gradient,
    ShapGradient,
};
pub use exact::{exact_game, exact_shapley, GAME_MAX_PLAYERS};
pub use monte_carlo::{mc_shapley, sample_permutations, PermutationEstimate};
pub use neuron::{ApproxStats, BiasMode, NeuronView, N_MAX_EXACT, SIGMA_FLOOR};
pub use normal::{norm_cdf, norm_pdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    MonteCarlo,
    Approx,
}

/// Per-input attributions of one neuron evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyResult {
    pub alpha: Vec<f64>,
    pub method: Method,
    /// Standard error of each entry; Monte-Carlo only.
    pub stderr: Option<Vec<f64>>,
    /// Value of the empty coalition, which is not attributed to any input.
    pub baseline: f64,
}

impl ShapleyResult {
    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }
}
