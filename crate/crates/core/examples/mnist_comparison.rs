//! ReLU, SA and ShapLU trained under identical seeds on an MNIST subset.
//!
//! cargo run --release --example mnist_comparison -- [data_dir] [repetitions]

use std::path::PathBuf;

use shapley_relu::cli::{cmd_train, render_summary, ExperimentConfig};
use shapley_relu::nn::Activation;

fn main() -> shapley_relu::Result<()> {
    let mut args = std::env::args().skip(1);
    let data_dir = PathBuf::from(args.next().unwrap_or_else(|| "data/mnist".into()));
    let repetitions = args
        .next()
        .map_or(3, |r| r.parse().expect("repetitions is a count"));
    let cfg = ExperimentConfig {
        activations: vec![Activation::Relu, Activation::Sa, Activation::ShapLu],
        repetitions,
        data_dir,
        out_dir: "out/mnist_comparison".into(),
        ..ExperimentConfig::default()
    };
    let metrics = cmd_train(&cfg)?;
    for act in &cfg.activations {
        let curve: Vec<String> = metrics
            .curve(*act)
            .iter()
            .map(|r| format!("{:.3}", r.train_acc_mean))
            .collect();
        println!("{act:<7} train accuracy by epoch: {}", curve.join(" "));
    }
    print!("{}", render_summary(&metrics, &cfg.activations));
    println!("outputs in {}", cfg.out_dir.display());
    Ok(())
}
