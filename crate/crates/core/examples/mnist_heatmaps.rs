//! Trains one SA network on an MNIST subset, then writes positive and
//! negative relevance heatmaps (PGM and CSV) per digit along with their
//! centre-to-border intensity ratio.
//!
//! cargo run --release --example mnist_heatmaps -- [data_dir] [mc_paths] [images_per_class]

use std::path::PathBuf;

use shapley_relu::cli::{
    checkpoint_path, cmd_interpret, cmd_train, AttributionMethod, ExperimentConfig, ImageSelection,
    InterpretOptions,
};
use shapley_relu::data::Split;
use shapley_relu::nn::Activation;
use shapley_relu::relevance::HeatmapPair;

fn main() -> shapley_relu::Result<()> {
    let mut args = std::env::args().skip(1);
    let data_dir = PathBuf::from(args.next().unwrap_or_else(|| "data/mnist".into()));
    let mc_paths = args
        .next()
        .map_or(200, |v| v.parse().expect("mc_paths is a count"));
    let n_images = args
        .next()
        .map_or(100, |v| v.parse().expect("images is a count"));
    let out = PathBuf::from("out/mnist_heatmaps");
    let cfg = ExperimentConfig {
        activations: vec![Activation::Sa],
        repetitions: 1,
        data_dir: data_dir.clone(),
        out_dir: out.join("train"),
        ..ExperimentConfig::default()
    };
    cmd_train(&cfg)?;
    let opts = InterpretOptions {
        checkpoint: checkpoint_path(&cfg.out_dir, Activation::Sa, 0),
        data_dir,
        out_dir: out.join("heatmaps"),
        split: Split::Test,
        classes: (0..10).collect(),
        mc_paths,
        n_images,
        epsilon: 1e-6,
        seed: 0,
        method: AttributionMethod::Shapley,
        selection: ImageSelection::SameClass,
    };
    for pair in cmd_interpret(&opts)? {
        let ratio =
            HeatmapPair::centre_border_ratio(&pair.positive, pair.height, pair.width, 20, 2);
        println!(
            "digit {}: {} images, centre/border {ratio:.1}",
            pair.class_id, pair.n_images
        );
    }
    println!("heatmaps in {}", opts.out_dir.display());
    Ok(())
}
