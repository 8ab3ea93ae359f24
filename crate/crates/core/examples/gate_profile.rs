//! Sweeps one product of a switched-off neuron and prints the gate. A large
//! product of either sign reopens the gate.

use shapley_relu::cli::{gate_profile_rows, GateProfileSpec};

fn main() -> shapley_relu::Result<()> {
    let spec = GateProfileSpec {
        steps: 11,
        ..GateProfileSpec::seeded(0)
    };
    println!(
        "products {:.3?}, bias {}, sweeping product {}",
        spec.products, spec.bias, spec.index
    );
    for row in gate_profile_rows(&spec)? {
        println!("{:>10.2} {:.6}", row.value, row.phi_gate);
    }
    for row in gate_profile_rows(&GateProfileSpec {
        min: -1e6,
        max: 1e6,
        steps: 3,
        ..spec
    })? {
        println!("{:>10.0e} {:.6}", row.value, row.phi_gate);
    }
    Ok(())
}
