use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::data::{
    load_mnist, take_subset, write_csv, write_csv_metrics, Batcher, Dataset, MetricRow, Split,
};
use crate::error::{Error, Result};
use crate::nn::{
    accuracy, cross_entropy, save_checkpoint, Activation, InitScheme, Network, OptimizerState,
};
use crate::rng;

/// Images per forward pass when evaluating a whole dataset.
const EVAL_CHUNK: usize = 1000;

/// A repetition that stopped on a non-finite value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub run_id: String,
    pub seed: u64,
    pub activation: String,
    pub epoch: usize,
    pub batch: usize,
    pub message: String,
}

/// Mean and standard deviation (`N − 1` denominator) across the successful
/// repetitions of one activation at one epoch. Deviations are empty with
/// fewer than two repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub activation: String,
    pub epoch: usize,
    pub repetitions: usize,
    pub train_loss_mean: f64,
    pub train_loss_std: Option<f64>,
    pub train_acc_mean: f64,
    pub train_acc_std: Option<f64>,
    pub val_acc_mean: Option<f64>,
    pub val_acc_std: Option<f64>,
}

/// Result of one seeded training run.
#[derive(Debug, Clone)]
pub struct RepOutcome {
    pub activation: Activation,
    pub repetition: usize,
    pub seed: u64,
    pub rows: Vec<MetricRow>,
    /// Trained network, absent when the run failed.
    pub network: Option<Network>,
    pub failure: Option<FailureRow>,
}

impl RepOutcome {
    pub fn run_id(&self) -> String {
        run_id(self.activation, self.repetition)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub rows: Vec<MetricRow>,
    pub failures: Vec<FailureRow>,
    pub aggregate: Vec<AggregateRow>,
}

impl RunMetrics {
    pub fn curve(&self, activation: Activation) -> Vec<&AggregateRow> {
        self.aggregate
            .iter()
            .filter(|r| r.activation == activation.name())
            .collect()
    }

    /// Mean validation accuracy at the last epoch.
    pub fn terminal_val_acc(&self, activation: Activation) -> Option<f64> {
        self.curve(activation).last().and_then(|r| r.val_acc_mean)
    }
}

pub fn run_id(activation: Activation, repetition: usize) -> String {
    format!("{activation}_rep{repetition}")
}

/// Seed of repetition `rep`; shared by every activation so that runs with
/// the same index start from the same weights and see the same batches.
pub fn repetition_seed(master: u64, rep: usize) -> u64 {
    rng::derive_seed(master, rep as u64)
}

/// Network of the configured shape with `activation` in every hidden layer
/// and a softmax head, initialized from `seed`.
pub fn build_network(cfg: &ExperimentConfig, activation: Activation, seed: u64) -> Result<Network> {
    let mut net = Network::mlp(&cfg.layer_sizes, activation, Activation::Softmax)?;
    net.init_params(InitScheme::GlorotUniform, seed);
    net.shaplu_correction = cfg.include_correction;
    Ok(net)
}

/// Mean cross-entropy and accuracy over a dataset.
pub fn evaluate(net: &Network, ds: &Dataset) -> Result<(f64, f64)> {
    let mut loss = 0.0;
    let mut correct = 0.0;
    let idx: Vec<usize> = (0..ds.len()).collect();
    for chunk in idx.chunks(EVAL_CHUNK) {
        let batch = ds.batch(chunk);
        let probs = net.predict(&batch.inputs)?;
        let (l, _) = cross_entropy(&probs, &batch.labels)?;
        loss += l * chunk.len() as f64;
        correct += accuracy(&probs, &batch.labels) * chunk.len() as f64;
    }
    let n = ds.len() as f64;
    Ok((loss / n, correct / n))
}

/// Trains one repetition. Epoch 0 records the untrained network; each later
/// row is measured on the full training set after the epoch.
pub fn train_repetition(
    cfg: &ExperimentConfig,
    activation: Activation,
    repetition: usize,
    train: &Dataset,
    val: Option<&Dataset>,
) -> Result<RepOutcome> {
    let seed = repetition_seed(cfg.seed, repetition);
    let id = run_id(activation, repetition);
    let mut net = build_network(cfg, activation, rng::derive_seed(seed, 0))?;
    let batcher = Batcher::new(cfg.batch_size, rng::derive_seed(seed, 1), true)?;
    let mut opt = OptimizerState::new(cfg.optimizer, &net);
    let mut rows = Vec::with_capacity(cfg.epochs + 1);
    let row = |epoch: usize, batch: usize, loss: f64, acc: f64, val_acc: Option<f64>| MetricRow {
        run_id: id.clone(),
        seed,
        activation: activation.name().into(),
        optimizer: cfg.optimizer.name().into(),
        lr: cfg.optimizer.learning_rate(),
        epoch,
        batch,
        train_loss: Some(loss),
        train_acc: Some(acc),
        val_acc,
    };
    let validate = |net: &Network, epoch: usize| -> Result<Option<f64>> {
        match val {
            Some(v) if cfg.validate_every_epoch || epoch == cfg.epochs => {
                Ok(Some(evaluate(net, v)?.1))
            }
            _ => Ok(None),
        }
    };
    let (loss0, acc0) = evaluate(&net, train)?;
    rows.push(row(0, 0, loss0, acc0, validate(&net, 0)?));

    let mut steps = 0;
    for epoch in 1..=cfg.epochs {
        for idx in batcher.epoch_indices(train.len(), epoch) {
            let batch = train.batch(&idx);
            let result = (|| -> Result<()> {
                let probs = net.forward(&batch.inputs)?;
                let (loss, grad) = cross_entropy(&probs, &batch.labels)?;
                if !loss.is_finite() {
                    return Err(Error::NonFinite(format!("training loss {loss}")));
                }
                let grads = net.backward_logits(&grad)?;
                opt.step(&mut net, &grads)
            })();
            match result {
                Ok(()) => steps += 1,
                Err(Error::NonFinite(message)) => {
                    return Ok(RepOutcome {
                        activation,
                        repetition,
                        seed,
                        rows,
                        network: None,
                        failure: Some(FailureRow {
                            run_id: id.clone(),
                            seed,
                            activation: activation.name().into(),
                            epoch,
                            batch: steps,
                            message,
                        }),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        let (loss, acc) = evaluate(&net, train)?;
        rows.push(row(epoch, steps, loss, acc, validate(&net, epoch)?));
    }
    Ok(RepOutcome {
        activation,
        repetition,
        seed,
        rows,
        network: Some(net),
        failure: None,
    })
}

fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() >= 2)
        .then(|| (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

/// Per-activation, per-epoch statistics over successful repetitions, in
/// the order the activations are listed.
pub fn aggregate(activations: &[Activation], outcomes: &[RepOutcome]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for &act in activations {
        let runs: Vec<&RepOutcome> = outcomes
            .iter()
            .filter(|o| o.activation == act && o.failure.is_none())
            .collect();
        let Some(first) = runs.first() else { continue };
        for e in 0..first.rows.len() {
            let col = |f: fn(&MetricRow) -> Option<f64>| -> Option<Vec<f64>> {
                runs.iter().map(|r| f(&r.rows[e])).collect()
            };
            let loss = col(|r| r.train_loss).unwrap_or_default();
            let acc = col(|r| r.train_acc).unwrap_or_default();
            let (train_loss_mean, train_loss_std) = mean_std(&loss);
            let (train_acc_mean, train_acc_std) = mean_std(&acc);
            let (val_acc_mean, val_acc_std) = match col(|r| r.val_acc) {
                Some(v) => {
                    let (m, s) = mean_std(&v);
                    (Some(m), s)
                }
                None => (None, None),
            };
            out.push(AggregateRow {
                activation: act.name().into(),
                epoch: first.rows[e].epoch,
                repetitions: runs.len(),
                train_loss_mean,
                train_loss_std,
                train_acc_mean,
                train_acc_std,
                val_acc_mean,
                val_acc_std,
            });
        }
    }
    out
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

/// Runs every (activation, repetition) pair on `cfg.jobs` workers. Outcomes
/// come back in configuration order whatever the scheduling.
pub fn run_training(
    cfg: &ExperimentConfig,
    train: &Dataset,
    val: Option<&Dataset>,
) -> Result<(RunMetrics, Vec<RepOutcome>)> {
    cfg.validate()?;
    let tasks: Vec<(Activation, usize)> = cfg
        .activations
        .iter()
        .flat_map(|&a| (0..cfg.repetitions).map(move |r| (a, r)))
        .collect();
    let outcomes: Vec<RepOutcome> = thread_pool(cfg.jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(a, r)| train_repetition(cfg, a, r, train, val))
            .collect::<Result<_>>()
    })?;
    let metrics = RunMetrics {
        rows: outcomes
            .iter()
            .flat_map(|o| o.rows.iter().cloned())
            .collect(),
        failures: outcomes.iter().filter_map(|o| o.failure.clone()).collect(),
        aggregate: aggregate(&cfg.activations, &outcomes),
    };
    Ok((metrics, outcomes))
}

pub fn checkpoint_path(out_dir: &Path, activation: Activation, repetition: usize) -> PathBuf {
    out_dir
        .join("checkpoints")
        .join(format!("{}.shpg", run_id(activation, repetition)))
}

/// Writes `config.json`, `metrics.csv`, `aggregate.csv`, `failures.csv` and
/// one checkpoint per successful repetition under `cfg.out_dir`.
pub fn write_training_outputs(
    cfg: &ExperimentConfig,
    metrics: &RunMetrics,
    outcomes: &[RepOutcome],
) -> Result<()> {
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir.join("checkpoints"))?;
    fs::write(dir.join("config.json"), cfg.to_json() + "\n")?;
    write_csv_metrics(dir.join("metrics.csv"), &metrics.rows)?;
    write_csv(dir.join("aggregate.csv"), &metrics.aggregate)?;
    if metrics.failures.is_empty() {
        fs::write(
            dir.join("failures.csv"),
            "run_id,seed,activation,epoch,batch,message\n",
        )?;
    } else {
        write_csv(dir.join("failures.csv"), &metrics.failures)?;
    }
    for o in outcomes {
        if let Some(net) = &o.network {
            save_checkpoint(net, &checkpoint_path(dir, o.activation, o.repetition))?;
        }
    }
    Ok(())
}

/// Loads the training subset and validation images named by `cfg`.
pub fn load_training_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let full = load_mnist(&cfg.data_dir, Split::Train)?;
    check_dims(cfg, &full)?;
    let train = take_subset(&full, cfg.train_subset, cfg.seed)?;
    let test = load_mnist(&cfg.data_dir, Split::Test)?;
    let val = match cfg.val_subset {
        Some(n) => take_subset(&test, n, cfg.seed)?,
        None => test,
    };
    Ok((train, val))
}

fn check_dims(cfg: &ExperimentConfig, ds: &Dataset) -> Result<()> {
    let pixels = ds.images.cols();
    if cfg.layer_sizes[0] != pixels {
        return Err(Error::Config(format!(
            "network takes {} inputs but images have {pixels} pixels",
            cfg.layer_sizes[0]
        )));
    }
    Ok(())
}

/// Training comparison end to end: load data, train, write outputs.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<RunMetrics> {
    cfg.validate()?;
    let (train, val) = load_training_data(cfg)?;
    let (metrics, outcomes) = run_training(cfg, &train, Some(&val))?;
    write_training_outputs(cfg, &metrics, &outcomes)?;
    Ok(metrics)
}

/// Final-epoch summary, one line per activation.
pub fn render_summary(metrics: &RunMetrics, activations: &[Activation]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    let mut out = format!(
        "{:<10} {:>5} {:>10} {:>10} {:>10} {:>10}\n",
        "activation", "reps", "train_acc", "std", "val_acc", "std"
    );
    for &a in activations {
        let failed = metrics
            .failures
            .iter()
            .filter(|f| f.activation == a.name())
            .count();
        match metrics.curve(a).last() {
            Some(r) => out.push_str(&format!(
                "{:<10} {:>5} {:>10} {:>10} {:>10} {:>10}\n",
                a.name(),
                r.repetitions,
                fmt(Some(r.train_acc_mean)),
                fmt(r.train_acc_std),
                fmt(r.val_acc_mean),
                fmt(r.val_acc_std)
            )),
            None => out.push_str(&format!("{:<10} all repetitions failed\n", a.name())),
        }
        if failed > 0 {
            out.push_str(&format!(
                "{:<10} {failed} failed repetition(s), see failures.csv\n",
                ""
            ));
        }
    }
    out
}
