use std::fmt::Write as _;

use rand::Rng as _;

use crate::error::Result;
use crate::nn::{
    grad_check, Activation, GradCheckConfig, GradCheckReport, InitScheme, Matrix, Network,
};
use crate::rng;

#[derive(Debug, Clone)]
pub struct GradcheckOptions {
    pub layer_sizes: Vec<usize>,
    pub hidden: Activation,
    pub head: Activation,
    pub batch: usize,
    pub include_correction: bool,
    pub seed: u64,
    pub check: GradCheckConfig,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self {
            layer_sizes: vec![8, 16, 4],
            hidden: Activation::Sa,
            head: Activation::Softmax,
            batch: 4,
            include_correction: false,
            seed: 0,
            check: GradCheckConfig::default(),
        }
    }
}

/// Random network and inputs drawn from `opts.seed`.
pub fn gradcheck_problem(opts: &GradcheckOptions) -> Result<(Network, Matrix, Vec<usize>)> {
    let mut net = Network::mlp(&opts.layer_sizes, opts.hidden, opts.head)?;
    net.init_params(InitScheme::GlorotUniform, rng::derive_seed(opts.seed, 0));
    net.shaplu_correction = opts.include_correction;
    let mut g = rng::seeded(rng::derive_seed(opts.seed, 1));
    let d = net.input_dim();
    let x: Vec<f64> = (0..opts.batch * d)
        .map(|_| g.gen_range(-1.0..1.0))
        .collect();
    let labels = (0..opts.batch)
        .map(|_| g.gen_range(0..net.output_dim()))
        .collect();
    Ok((net, Matrix::from_vec(opts.batch, d, x)?, labels))
}

pub fn cmd_gradcheck(opts: &GradcheckOptions) -> Result<GradCheckReport> {
    let (net, x, labels) = gradcheck_problem(opts)?;
    grad_check(&net, &x, &labels, &opts.check)
}

pub fn render_gradcheck(report: &GradCheckReport) -> String {
    let mut out = String::new();
    let gated = report.checks.iter().filter(|c| !c.via_shaplu).count();
    writeln!(
        out,
        "checked {} parameters ({gated} gated), skipped {} at kinks",
        report.checks.len(),
        report.skipped_kinks
    )
    .unwrap();
    writeln!(
        out,
        "max relative error {:.3e} (tolerance {:.1e})",
        report.max_rel_error, report.tolerance
    )
    .unwrap();
    if let Some(d) = report.shaplu_max_deviation {
        writeln!(out, "shaplu max deviation {d:.3e} (not gated)").unwrap();
    }
    writeln!(out, "{}", if report.passed { "PASS" } else { "FAIL" }).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_problem_passes() {
        let report = cmd_gradcheck(&GradcheckOptions::default()).unwrap();
        assert!(report.passed, "{}", render_gradcheck(&report));
        assert!(render_gradcheck(&report).ends_with("PASS\n"));
    }
}
