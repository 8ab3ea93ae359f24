//! Trains the same 2-16-2 network with each hidden backend on a linearly
//! separable toy problem.

use shapley_relu::data::{linearly_separable, Batcher};
use shapley_relu::nn::{
    accuracy, cross_entropy, Activation, InitScheme, Network, OptimizerKind, OptimizerState,
};

fn main() -> shapley_relu::Result<()> {
    let train = linearly_separable(200, 0);
    let test = linearly_separable(1000, 1);
    for act in [Activation::Relu, Activation::Sa, Activation::ShapLu] {
        let mut net = Network::mlp(&[2, 16, 2], act, Activation::Softmax)?;
        net.init_params(InitScheme::GlorotUniform, 7);
        let mut opt = OptimizerState::new(OptimizerKind::sgd(0.1), &net);
        let batcher = Batcher::new(10, 3, true)?;
        print!("{act:<7}");
        for epoch in 0..50 {
            let mut loss = 0.0;
            for batch in batcher.epoch(&train, epoch) {
                let probs = net.forward(&batch.inputs)?;
                let (l, grad) = cross_entropy(&probs, &batch.labels)?;
                loss += l;
                let grads = net.backward_logits(&grad)?;
                opt.step(&mut net, &grads)?;
            }
            if epoch % 10 == 9 {
                print!(" ep{:<2} loss {:.3}", epoch + 1, loss / 20.0);
            }
        }
        println!(
            "  test acc {:.3}",
            accuracy(&net.predict(&test.images)?, &test.labels)
        );
    }
    Ok(())
}
