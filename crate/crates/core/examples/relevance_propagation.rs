//! Relevance propagation through a small random network: the top relevance
//! comes from Monte-Carlo Shapley values of the softmax head's inputs and is
//! conserved layer by layer down to the input.

use rand::Rng;
use shapley_relu::nn::{Activation, InitScheme, Network};
use shapley_relu::relevance::{
    init_relevance_softmax_exact, init_relevance_softmax_mc, lrp_network,
};
use shapley_relu::rng;

fn main() -> shapley_relu::Result<()> {
    let mut net = Network::mlp(&[6, 8, 5, 3], Activation::Relu, Activation::Softmax)?;
    net.init_params(InitScheme::GlorotUniform, 1);
    let mut g = rng::seeded(2);
    for layer in net.layers_mut() {
        layer
            .bias
            .iter_mut()
            .for_each(|b| *b = g.gen_range(0.0..0.2));
    }
    let x: Vec<f64> = (0..6).map(|_| g.gen_range(0.0..1.0)).collect();
    let probs = net.predict(&shapley_relu::nn::Matrix::row_vector(&x))?;
    let class = shapley_relu::nn::argmax(probs.row(0));
    println!(
        "input {x:.3?}\npredicted class {class}, p = {:.4}",
        probs.get(0, class)
    );

    let mc = init_relevance_softmax_mc(&net, &x, class, 10_000, 0)?;
    let exact = init_relevance_softmax_exact(&net, &x, class)?;
    println!("head-input relevance (mc)    {:.4?}", mc.relevance);
    println!("head-input relevance (exact) {exact:.4?}");
    println!("p(full) - p(empty) = {:.4}", mc.full - mc.empty);

    for eps in [0.0, 1e-2] {
        let map = lrp_network(&net, &x, &exact, eps)?;
        println!("epsilon {eps}: layer sums {:.6?}", map.layer_sums());
        println!("  input relevance {:.4?}", map.input());
    }
    Ok(())
}
