//! Small dense network engine with interchangeable activation backends.
//!
//! Layers compute `y = f(W x + b)`. ReLU, SA and ShapLU differ only in `f`
//! and in the backward rule; ShapLU keeps the ReLU forward and uses the
//! Shapley gradient backward. Training pairs a softmax head with
//! cross-entropy, fused so the head's backward starts from the logits.

mod batch;
mod checkpoint;
mod gradcheck;
mod layer;
mod loss;
mod matrix;
mod network;
mod optim;

pub use batch::Batch;
pub use checkpoint::{
    load as load_checkpoint, read_checkpoint, save as save_checkpoint, write_checkpoint,
};
pub use gradcheck::{grad_check, relative_error, GradCheckConfig, GradCheckReport, ParamCheck};
pub use layer::{Activation, DenseLayer};
pub use loss::{accuracy, argmax, cross_entropy, PROB_FLOOR};
pub use matrix::Matrix;
pub use network::{
    glorot_limit, softmax_into, GradSeed, Gradients, InitScheme, LayerGrad, LayerTrace, Network,
    Trace,
};
pub use optim::{adam_update, sgd_update, OptimizerKind, OptimizerState};
