//! Exact, sampled and approximate Shapley values of one ReLU neuron.
//!
//! cargo run --example shapley_values -- -1 4 -3 --bias -1

use shapley_relu::cli::cmd_eval;
use shapley_relu::shapley::BiasMode;

fn main() -> shapley_relu::Result<()> {
    let mut products = Vec::new();
    let mut bias = -1.0;
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--bias" {
            bias = args
                .next()
                .and_then(|v| v.parse().ok())
                .expect("--bias takes a number");
        } else {
            products.push(a.parse::<f64>().expect("products are numbers"));
        }
    }
    if products.is_empty() {
        products = vec![-1.0, 4.0, -3.0];
    }
    for mode in [BiasMode::Anchored, BiasMode::Shared] {
        println!("{mode:?} bias");
        print!("{}", cmd_eval(&products, bias, mode, 20_000, 0)?.render());
        println!();
    }
    Ok(())
}
