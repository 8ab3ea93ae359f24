use std::fmt::Write as _;

use crate::error::Result;
use crate::shapley::{
    approx_shapley, exact_shapley, mc_shapley, sa_value, BiasMode, NeuronView, ShapleyResult,
    N_MAX_EXACT,
};

/// The three estimators side by side for one neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub products: Vec<f64>,
    pub bias: f64,
    pub mode: BiasMode,
    /// Absent above the enumeration limit.
    pub exact: Option<ShapleyResult>,
    pub monte_carlo: ShapleyResult,
    pub approx: ShapleyResult,
    pub relu: f64,
    pub sa: f64,
}

pub fn cmd_eval(
    products: &[f64],
    bias: f64,
    mode: BiasMode,
    paths: usize,
    seed: u64,
) -> Result<EvalReport> {
    let nv = NeuronView::new(products.to_vec(), bias)?;
    let exact = if nv.n() <= N_MAX_EXACT {
        Some(exact_shapley(&nv, mode)?)
    } else {
        None
    };
    Ok(EvalReport {
        products: products.to_vec(),
        bias,
        mode,
        exact,
        monte_carlo: mc_shapley(&nv, mode, paths, seed)?,
        approx: approx_shapley(&nv),
        relu: nv.relu(),
        sa: sa_value(&nv),
    })
}

impl EvalReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let exact = |k: usize| self.exact.as_ref().map(|e| e.alpha[k]);
        let cell =
            |v: Option<f64>| v.map_or_else(|| format!("{:>11}", "-"), |v| format!("{v:>11.6}"));
        let stderr = self.monte_carlo.stderr.as_deref().unwrap_or(&[]);
        writeln!(
            out,
            "{:>3} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
            "k", "product", "exact", "mc", "mc_stderr", "approx", "mc_err", "approx_err"
        )
        .unwrap();
        for (k, &p) in self.products.iter().enumerate() {
            let e = exact(k);
            writeln!(
                out,
                "{k:>3} {p:>11.6} {} {} {} {} {} {}",
                cell(e),
                cell(Some(self.monte_carlo.alpha[k])),
                cell(stderr.get(k).copied()),
                cell(Some(self.approx.alpha[k])),
                cell(e.map(|e| (self.monte_carlo.alpha[k] - e).abs())),
                cell(e.map(|e| (self.approx.alpha[k] - e).abs())),
            )
            .unwrap();
        }
        writeln!(
            out,
            "{:>3} {:>11} {} {} {:>11} {}",
            "sum",
            "",
            cell(self.exact.as_ref().map(ShapleyResult::total)),
            cell(Some(self.monte_carlo.total())),
            "",
            cell(Some(self.approx.total())),
        )
        .unwrap();
        writeln!(
            out,
            "bias {} ({:?}), baseline {}, relu {}, sa {}",
            self.bias, self.mode, self.monte_carlo.baseline, self.relu, self.sa
        )
        .unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_one_report() {
        let r = cmd_eval(&[-1.0, 4.0, -3.0], -1.0, BiasMode::Anchored, 5000, 0).unwrap();
        let e = r.exact.as_ref().unwrap();
        assert!((e.alpha[1] - 4.0 / 3.0).abs() < 1e-12);
        let text = r.render();
        assert!(text.contains("1.333333"), "{text}");
        assert!(text.contains("-0.166667"), "{text}");
    }

    #[test]
    fn single_and_zero_inputs() {
        let r = cmd_eval(&[2.0], 0.0, BiasMode::Anchored, 100, 0).unwrap();
        assert_eq!(r.exact.unwrap().alpha, vec![2.0]);
        assert_eq!(r.monte_carlo.alpha, vec![2.0]);
        assert!((r.approx.alpha[0] - 1.682_689_492_137_085_9).abs() < 1e-12);
        let z = cmd_eval(&[0.0, 0.0], 0.0, BiasMode::Anchored, 100, 0).unwrap();
        assert!(z
            .exact
            .unwrap()
            .alpha
            .iter()
            .chain(&z.approx.alpha)
            .all(|v| *v == 0.0));
    }

    #[test]
    fn wide_neurons_skip_exact() {
        let r = cmd_eval(&[0.1; 11], 0.0, BiasMode::Anchored, 10, 0).unwrap();
        assert!(r.exact.is_none());
        assert!(r.render().contains('-'));
    }
}
