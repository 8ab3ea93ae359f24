use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::write_csv;
use crate::error::{Error, Result};
use crate::rng;
use crate::shapley::{gate_profile, sa_value, NeuronView};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateRow {
    pub value: f64,
    pub phi_gate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub s: f64,
    pub sa: f64,
}

/// One product of a fixed neuron swept over `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateProfileSpec {
    pub products: Vec<f64>,
    pub bias: f64,
    pub index: usize,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GateProfileSpec {
    /// Five products drawn from `U(-1, 1)` with bias −1, swept over
    /// `[-20, 20]` in steps of 0.05.
    pub fn seeded(seed: u64) -> Self {
        Self {
            products: uniform_products(5, &mut rng::seeded(seed)),
            bias: -1.0,
            index: 0,
            min: -20.0,
            max: 20.0,
            steps: 801,
        }
    }
}

fn uniform_products(n: usize, g: &mut rng::Rng) -> Vec<f64> {
    (0..n).map(|_| g.gen_range(-1.0..1.0)).collect()
}

pub fn gate_profile_rows(spec: &GateProfileSpec) -> Result<Vec<GateRow>> {
    if spec.steps < 2 || spec.max.partial_cmp(&spec.min) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidArgument(
            "need at least 2 steps over a nonempty range".into(),
        ));
    }
    let nv = NeuronView::new(spec.products.clone(), spec.bias)?;
    let step = (spec.max - spec.min) / (spec.steps - 1) as f64;
    let values: Vec<f64> = (0..spec.steps)
        .map(|i| spec.min + step * i as f64)
        .collect();
    let gates = gate_profile(&nv, spec.index, &values)?;
    Ok(values
        .into_iter()
        .zip(gates)
        .map(|(value, phi_gate)| GateRow { value, phi_gate })
        .collect())
}

/// `samples` neurons with `n` products from `U(-1, 1)` and bias `bias`,
/// each reduced to its pre-activation and Shapley Activation.
pub fn sa_scatter_rows(n: usize, samples: usize, bias: f64, seed: u64) -> Result<Vec<ScatterRow>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one product".into()));
    }
    let mut g = rng::seeded(seed);
    (0..samples)
        .map(|_| {
            let nv = NeuronView::new(uniform_products(n, &mut g), bias)?;
            Ok(ScatterRow {
                s: nv.pre_activation(),
                sa: sa_value(&nv),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    GateProfile,
    SaScatter,
}

/// Writes `gate_profile.csv` or `sa_scatter.csv` into `out_dir`.
pub fn cmd_figures(
    kind: FigureKind,
    out_dir: &Path,
    gate: &GateProfileSpec,
    scatter_n: usize,
    scatter_samples: usize,
    seed: u64,
) -> Result<PathBuf> {
    match kind {
        FigureKind::GateProfile => {
            let path = out_dir.join("gate_profile.csv");
            write_csv(&path, &gate_profile_rows(gate)?)?;
            Ok(path)
        }
        FigureKind::SaScatter => {
            let path = out_dir.join("sa_scatter.csv");
            write_csv(
                &path,
                &sa_scatter_rows(scatter_n, scatter_samples, 0.0, seed)?,
            )?;
            Ok(path)
        }
    }
}
