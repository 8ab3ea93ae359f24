//! Layer-wise relevance propagation seeded with Shapley values.
//!
//! Relevance starts at the top of the network: at the inputs of a softmax
//! head (Monte-Carlo Shapley values of the class probability) or at a linear
//! or linear+ReLU output neuron (the analytic approximation). It is then
//! split layer by layer with a share rule that conserves the total. The
//! rule treats hidden activations as independent, so the input relevance is
//! an approximation of the whole-network Shapley value; the exact and
//! sampled whole-network values are available for small networks to measure
//! the gap.

mod heatmap;
mod init;
mod lrp;

pub use heatmap::{
    aggregate_heatmaps, sensitivity_heatmaps, shapley_heatmaps, write_heatmap_pair, HeatmapPair,
    ShapleyHeatmapConfig, X_FLOOR,
};
pub use init::{
    init_relevance_linear_relu, init_relevance_softmax_exact, init_relevance_softmax_mc,
    input_shapley_exact, input_shapley_mc, SoftmaxInit, INPUT_SHAPLEY_MAX,
};
pub use lrp::{lrp_layer, lrp_network, lrp_trace, RelevanceMap, DEFAULT_EPSILON};
