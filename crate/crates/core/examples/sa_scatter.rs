//! Writes (s, SA(s)) pairs for random neurons to a CSV, and prints a coarse
//! summary of how SA bends ReLU.

use std::path::PathBuf;

use shapley_relu::cli::sa_scatter_rows;
use shapley_relu::data::write_csv;

fn main() -> shapley_relu::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "out/figures".into()),
    );
    std::fs::create_dir_all(&out)?;
    let rows = sa_scatter_rows(5, 1000, 0.0, 0)?;
    write_csv(out.join("sa_scatter.csv"), &rows)?;
    for lo in [-4.0, -2.0, 0.0, 2.0] {
        let bin: Vec<_> = rows
            .iter()
            .filter(|r| r.s >= lo && r.s < lo + 2.0)
            .collect();
        let mean =
            |f: &dyn Fn(&&_) -> f64| bin.iter().map(f).sum::<f64>() / bin.len().max(1) as f64;
        println!(
            "s in [{lo:>4}, {:>4}): {:>4} neurons, mean s {:>7.3}, mean SA {:>7.3}",
            lo + 2.0,
            bin.len(),
            mean(&|r| r.s),
            mean(&|r| r.sa)
        );
    }
    println!("wrote {}", out.join("sa_scatter.csv").display());
    Ok(())
}
