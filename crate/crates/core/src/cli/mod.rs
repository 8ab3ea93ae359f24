//! Command-line front end of the `shapnet` binary, plus the experiment
//! runners it calls. Every command is also usable as a library function.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 data error,
//! 4 numerical failure (including a failed gradient check).

mod config;
mod eval;
mod figures;
mod gradcheck;
mod interpret;
mod train;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::ExperimentConfig;
pub use eval::{cmd_eval, EvalReport};
pub use figures::{
    cmd_figures, gate_profile_rows, sa_scatter_rows, FigureKind, GateProfileSpec, GateRow,
    ScatterRow,
};
pub use gradcheck::{cmd_gradcheck, gradcheck_problem, render_gradcheck, GradcheckOptions};
pub use interpret::{
    class_images, cmd_interpret, interpret_network, shared_images, AttributionMethod,
    ImageSelection, InterpretOptions,
};
pub use train::{
    aggregate, build_network, checkpoint_path, cmd_train, evaluate, load_training_data,
    render_summary, repetition_seed, run_id, run_training, train_repetition,
    write_training_outputs, AggregateRow, FailureRow, RepOutcome, RunMetrics,
};

use crate::data::Split;
use crate::error::{Error, Result};
use crate::nn::{Activation, GradCheckConfig, OptimizerKind};
use crate::shapley::BiasMode;

#[derive(Debug, Parser)]
#[command(
    name = "shapnet",
    version,
    about = "Shapley values, Shapley activations and relevance heatmaps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact, Monte-Carlo and approximate Shapley values of one neuron.
    Eval(EvalArgs),
    /// Train and compare activation backends on MNIST.
    Train(TrainArgs),
    /// Per-class relevance or sensitivity heatmaps from a checkpoint.
    Interpret(InterpretArgs),
    /// CSV data for the gate profile and SA scatter plots.
    Figures(FiguresArgs),
    /// Finite-difference check of backpropagated gradients.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Anchored,
    Shared,
}

impl From<ModeArg> for BiasMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Anchored => BiasMode::Anchored,
            ModeArg::Shared => BiasMode::Shared,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Products w_k x_k, comma separated.
    #[arg(
        short,
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub products: Vec<f64>,
    #[arg(short, long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub bias: f64,
    #[arg(long, value_enum, default_value = "anchored")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 20_000)]
    pub mc_paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Hidden activation to train; repeat to compare several.
    #[arg(long = "activation")]
    pub activations: Vec<Activation>,
    #[arg(long, value_delimiter = ',')]
    pub layer_sizes: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerArg>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub train_subset: Option<usize>,
    #[arg(long)]
    pub val_subset: Option<usize>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub mc_paths: Option<usize>,
    /// Keep the gate-derivative terms of the ShapLU backward rule.
    #[arg(long)]
    pub include_correction: bool,
    #[arg(long)]
    pub validate_every_epoch: bool,
}

impl TrainArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.data_dir {
            cfg.data_dir = v.clone();
        }
        if let Some(v) = &self.out_dir {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.jobs {
            cfg.jobs = v;
        }
        if !self.activations.is_empty() {
            cfg.activations = self.activations.clone();
        }
        if let Some(v) = &self.layer_sizes {
            cfg.layer_sizes = v.clone();
        }
        let lr = self.lr.unwrap_or(cfg.optimizer.learning_rate());
        cfg.optimizer = match (self.optimizer, cfg.optimizer) {
            (Some(OptimizerArg::Sgd), _) | (None, OptimizerKind::Sgd { .. }) => {
                OptimizerKind::sgd(lr)
            }
            (
                Some(OptimizerArg::Adam),
                OptimizerKind::Adam {
                    beta1, beta2, eps, ..
                },
            )
            | (
                None,
                OptimizerKind::Adam {
                    beta1, beta2, eps, ..
                },
            ) => OptimizerKind::Adam {
                lr,
                beta1,
                beta2,
                eps,
            },
            (Some(OptimizerArg::Adam), OptimizerKind::Sgd { .. }) => OptimizerKind::adam(lr),
        };
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.train_subset {
            cfg.train_subset = v;
        }
        if self.val_subset.is_some() {
            cfg.val_subset = self.val_subset;
        }
        if let Some(v) = self.repetitions {
            cfg.repetitions = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.mc_paths {
            cfg.mc_paths = v;
        }
        cfg.include_correction |= self.include_correction;
        cfg.validate_every_epoch |= self.validate_every_epoch;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

#[derive(Debug, Args)]
pub struct InterpretArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "data/mnist")]
    pub data_dir: PathBuf,
    #[arg(long, default_value = "out/heatmaps")]
    pub out_dir: PathBuf,
    /// Classes to explain, comma separated or repeated; all ten by default.
    #[arg(long = "class", value_delimiter = ',')]
    pub classes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub mc_paths: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_images: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "shapley")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    /// Average each class over images of that class, or over one shared
    /// image pool.
    #[arg(long, value_enum, default_value = "same-class")]
    pub images: ImagesArg,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ImagesArg {
    Shared,
    SameClass,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Shapley,
    Sensitivity,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FigureArg {
    GateProfile,
    SaScatter,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub kind: FigureArg,
    #[arg(long, default_value = "out/figures")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed products of the swept neuron; drawn from U(-1, 1) when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub products: Option<Vec<f64>>,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub bias: f64,
    /// Product to sweep.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    pub min: f64,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pub max: f64,
    #[arg(long, default_value_t = 801)]
    pub steps: usize,
    /// Products per neuron in the scatter.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,16,4")]
    pub layer_sizes: Vec<usize>,
    #[arg(long, default_value = "sa")]
    pub activation: Activation,
    #[arg(long, default_value = "softmax")]
    pub head: Activation,
    #[arg(long, default_value_t = 4)]
    pub batch: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    #[arg(long)]
    pub include_correction: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn run_interpret(a: &InterpretArgs) -> Result<()> {
    let opts = InterpretOptions {
        checkpoint: a.checkpoint.clone(),
        data_dir: a.data_dir.clone(),
        out_dir: a.out_dir.clone(),
        split: match a.split {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        },
        classes: if a.classes.is_empty() {
            (0..10).collect()
        } else {
            a.classes.clone()
        },
        mc_paths: a.mc_paths,
        n_images: a.n_images,
        epsilon: a.epsilon,
        seed: a.seed,
        method: match a.method {
            MethodArg::Shapley => AttributionMethod::Shapley,
            MethodArg::Sensitivity => AttributionMethod::Sensitivity,
        },
        selection: match a.images {
            ImagesArg::Shared => ImageSelection::Shared,
            ImagesArg::SameClass => ImageSelection::SameClass,
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let pairs = pool.install(|| cmd_interpret(&opts))?;
    for p in &pairs {
        println!(
            "class {}: {} images, max {:.4e}, written to {}",
            p.class_id,
            p.n_images,
            p.max_value(),
            opts.out_dir.display()
        );
    }
    Ok(())
}

/// Runs one parsed command and returns its exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Eval(a) => {
            let report = cmd_eval(&a.products, a.bias, a.mode.into(), a.mc_paths, a.seed)?;
            print!("{}", report.render());
        }
        Command::Train(a) => {
            let cfg = a.resolve()?;
            let metrics = cmd_train(&cfg)?;
            print!("{}", render_summary(&metrics, &cfg.activations));
            println!("outputs written to {}", cfg.out_dir.display());
        }
        Command::Interpret(a) => run_interpret(&a)?,
        Command::Figures(a) => {
            let gate = GateProfileSpec {
                products: a
                    .products
                    .clone()
                    .unwrap_or_else(|| GateProfileSpec::seeded(a.seed).products),
                bias: a.bias,
                index: a.index,
                min: a.min,
                max: a.max,
                steps: a.steps,
            };
            let kind = match a.kind {
                FigureArg::GateProfile => FigureKind::GateProfile,
                FigureArg::SaScatter => FigureKind::SaScatter,
            };
            let path = cmd_figures(kind, &a.out_dir, &gate, a.n, a.samples, a.seed)?;
            println!("wrote {}", path.display());
        }
        Command::Gradcheck(a) => {
            let opts = GradcheckOptions {
                layer_sizes: a.layer_sizes,
                hidden: a.activation,
                head: a.head,
                batch: a.batch,
                include_correction: a.include_correction,
                seed: a.seed,
                check: GradCheckConfig {
                    tolerance: a.tolerance,
                    samples: a.samples,
                    step: a.step,
                    seed: a.seed,
                    ..GradCheckConfig::default()
                },
            };
            let report = cmd_gradcheck(&opts)?;
            print!("{}", render_gradcheck(&report));
            if !report.passed {
                return Ok(4);
            }
        }
    }
    Ok(0)
}

/// Parses `args` (program name first), runs the command and maps errors to
/// exit codes, reporting them on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("shapnet").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn negative_products_parse() {
        let Command::Eval(a) = parse(&["eval", "-p", "-1,4,-3", "-b", "-1"]).command else {
            panic!()
        };
        assert_eq!(a.products, vec![-1.0, 4.0, -3.0]);
        assert_eq!(a.bias, -1.0);
    }

    #[test]
    fn train_flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"epochs": 2, "repetitions": 3, "seed": 5}"#).unwrap();
        let Command::Train(a) = parse(&[
            "train",
            "--config",
            p.to_str().unwrap(),
            "--activation",
            "sa",
            "--activation",
            "shaplu",
            "--seed",
            "9",
            "--lr",
            "0.01",
            "--include-correction",
        ])
        .command
        else {
            panic!()
        };
        let cfg = a.resolve().unwrap();
        assert_eq!(cfg.epochs, 2);
        assert_eq!(cfg.repetitions, 3);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.activations, vec![Activation::Sa, Activation::ShapLu]);
        assert_eq!(cfg.optimizer, OptimizerKind::adam(0.01));
        assert!(cfg.include_correction);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["shapnet", "eval", "-p", "0,0"]), 0);
        assert_eq!(main_with_args(["shapnet", "bogus"]), 2);
        assert_eq!(
            main_with_args(["shapnet", "train", "--repetitions", "0"]),
            2
        );
        assert_eq!(
            main_with_args(["shapnet", "train", "--activation", "gelu"]),
            2
        );
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("none");
        assert_eq!(
            main_with_args([
                "shapnet",
                "train",
                "--data-dir",
                missing.to_str().unwrap(),
                "--out-dir",
                dir.path().to_str().unwrap()
            ]),
            3
        );
        assert_eq!(main_with_args(["shapnet", "gradcheck"]), 0);
    }
}
