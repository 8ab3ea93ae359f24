use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, OptimizerKind};

/// Serialized description of a training comparison. Every field has a
/// default, so a JSON file only needs the fields it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `[inputs, hidden..., classes]`; the last layer is a softmax head.
    pub layer_sizes: Vec<usize>,
    /// Hidden-layer backends to compare under identical seeds.
    pub activations: Vec<Activation>,
    pub optimizer: OptimizerKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub train_subset: usize,
    /// Validation images taken from the test split; `None` uses all of them.
    pub val_subset: Option<usize>,
    pub validate_every_epoch: bool,
    pub repetitions: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub mc_paths: usize,
    pub include_correction: bool,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![784, 100, 50, 10],
            activations: vec![Activation::Relu],
            optimizer: OptimizerKind::adam(0.001),
            epochs: 4,
            batch_size: 10,
            train_subset: 1000,
            val_subset: None,
            validate_every_epoch: false,
            repetitions: 10,
            seed: 0,
            epsilon: 1e-6,
            mc_paths: 1000,
            include_correction: false,
            jobs: 0,
            data_dir: PathBuf::from("data/mnist"),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return fail(format!("invalid layer sizes {:?}", self.layer_sizes));
        }
        if self.activations.is_empty() {
            return fail("at least one activation is required".into());
        }
        if let Some(a) = self.activations.iter().find(|a| **a == Activation::Softmax) {
            return fail(format!("{a} cannot be a hidden activation"));
        }
        if self.repetitions == 0
            || self.epochs == 0
            || self.batch_size == 0
            || self.train_subset == 0
        {
            return fail(
                "repetitions, epochs, batch_size and train_subset must be at least 1".into(),
            );
        }
        if self.mc_paths < 2 {
            return fail("mc_paths must be at least 2".into());
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return fail(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        let lr = self.optimizer.learning_rate();
        if !(lr > 0.0 && lr.is_finite()) {
            return fail(format!("learning rate must be positive, got {lr}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"activations": ["sa", "shaplu"], "optimizer": {"kind": "sgd", "lr": 0.1}}"#,
        )
        .unwrap();
        assert_eq!(cfg.activations, vec![Activation::Sa, Activation::ShapLu]);
        assert_eq!(cfg.optimizer, OptimizerKind::sgd(0.1));
        assert_eq!(cfg.epochs, 4);
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            r#"{"repetitions": 0}"#,
            r#"{"activations": ["softmax"]}"#,
            r#"{"activations": ["gelu"]}"#,
            r#"{"layer_sizes": [784]}"#,
            r#"{"unknown": 1}"#,
        ] {
            let err = ExperimentConfig::from_json(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }
}
