#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use shapley_relu::data::{encode_idx_images, encode_idx_labels, IdxImages};
use shapley_relu::rng;
use shapley_relu::shapley::NeuronView;

/// MNIST directory: `SHAPNET_MNIST_DIR` or `data/mnist` at the workspace root.
pub fn mnist_dir() -> PathBuf {
    std::env::var_os("SHAPNET_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

pub fn mnist_available() -> bool {
    mnist_dir().join("train-images-idx3-ubyte").is_file()
        || mnist_dir().join("train-images.idx3-ubyte").is_file()
}

pub fn random_neuron(g: &mut rng::Rng, n_max: usize, p_range: f64, b_range: f64) -> NeuronView {
    let n = g.gen_range(1..=n_max);
    let products = (0..n).map(|_| g.gen_range(-p_range..p_range)).collect();
    NeuronView::new(products, g.gen_range(-b_range..b_range)).unwrap()
}

/// Writes a small MNIST-shaped dataset (both splits) into `dir`. Class `c`
/// images have a bright square whose position depends on `c`.
pub fn write_fake_mnist(dir: &std::path::Path, train: usize, test: usize, seed: u64) {
    let mut g = rng::seeded(seed);
    for (prefix, count) in [("train", train), ("t10k", test)] {
        let mut pixels = vec![0u8; count * 784];
        let mut labels = Vec::with_capacity(count);
        for i in 0..count {
            let c = i % 10;
            labels.push(c as u8);
            let (r0, c0) = (4 + (c / 5) * 10, 4 + (c % 5) * 4);
            for r in r0..r0 + 8 {
                for col in c0..c0 + 4 {
                    pixels[i * 784 + r * 28 + col] = g.gen_range(150..=255);
                }
            }
        }
        let images = IdxImages {
            count,
            rows: 28,
            cols: 28,
            pixels,
        };
        std::fs::write(
            dir.join(format!("{prefix}-images-idx3-ubyte")),
            encode_idx_images(&images),
        )
        .unwrap();
        std::fs::write(
            dir.join(format!("{prefix}-labels-idx1-ubyte")),
            encode_idx_labels(&labels),
        )
        .unwrap();
    }
}
