//! Finite-difference check of every backend's backward pass.

use shapley_relu::cli::{cmd_gradcheck, render_gradcheck, GradcheckOptions};
use shapley_relu::nn::Activation;

fn main() -> shapley_relu::Result<()> {
    for hidden in [Activation::Sa, Activation::Relu, Activation::ShapLu] {
        for include_correction in [false, true] {
            if hidden != Activation::ShapLu && include_correction {
                continue;
            }
            let opts = GradcheckOptions {
                hidden,
                include_correction,
                ..GradcheckOptions::default()
            };
            println!("-- {hidden} (correction {include_correction})");
            print!("{}", render_gradcheck(&cmd_gradcheck(&opts)?));
        }
    }
    Ok(())
}
