//! How far the analytic approximation is from exact Shapley values as the
//! number of inputs grows.

use rand::Rng;
use shapley_relu::rng;
use shapley_relu::shapley::{approx_shapley, exact_shapley, BiasMode, NeuronView};

fn main() {
    let mut g = rng::seeded(0);
    println!("{:>3} {:>12} {:>12}", "n", "mean |err|", "max |err|");
    for n in 2..=10 {
        let (mut sum, mut max, mut count) = (0.0, 0.0f64, 0);
        for _ in 0..500 {
            let p: Vec<f64> = (0..n).map(|_| g.gen_range(-1.0..1.0)).collect();
            let nv = NeuronView::new(p, g.gen_range(-1.0..1.0)).unwrap();
            let exact = exact_shapley(&nv, BiasMode::Anchored).unwrap();
            let approx = approx_shapley(&nv);
            for (a, e) in approx.alpha.iter().zip(&exact.alpha) {
                let d = (a - e).abs();
                sum += d;
                max = max.max(d);
                count += 1;
            }
        }
        println!("{n:>3} {:>12.5} {:>12.5}", sum / count as f64, max);
    }
}
